//! Domain specification files.
//!
//! ```toml
//! builtin = "half_ellipse 2 1"
//! ```
//! or
//! ```toml
//! polygon = [[0, 0], [2, 0], [1, 1.5]]
//! ```

use serde::{Deserialize, Serialize};

use super::{Domain, GeometryError, Vec2};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polygon: Option<Vec<[f64; 2]>>,
}

impl DomainSpec {
    pub fn builtin(name: impl Into<String>) -> Self {
        DomainSpec { builtin: Some(name.into()), polygon: None }
    }

    pub fn parse(text: &str) -> Result<Self, GeometryError> {
        toml::from_str(text).map_err(|e| GeometryError::Spec(e.to_string()))
    }

    pub fn build(&self) -> Result<Domain, GeometryError> {
        match (&self.builtin, &self.polygon) {
            (Some(b), None) => parse_builtin(b),
            (None, Some(v)) => {
                let pts: Vec<Vec2> = v.iter().map(|&p| p.into()).collect();
                Domain::polygon(&pts)
            }
            _ => Err(GeometryError::Spec("exactly one of `builtin` or `polygon` is required".into())),
        }
    }
}

fn parse_builtin(text: &str) -> Result<Domain, GeometryError> {
    let mut words = text.split_whitespace();
    let name = words.next().unwrap_or_default();
    let args: Vec<f64> = words
        .map(|w| w.parse::<f64>().map_err(|_| GeometryError::Spec(format!("bad number `{w}` in `{text}`"))))
        .collect::<Result<_, _>>()?;
    let need = |n: usize| {
        if args.len() == n {
            Ok(())
        } else {
            Err(GeometryError::Spec(format!("`{name}` takes {n} argument(s), got {}", args.len())))
        }
    };
    match name {
        "unit_square" => need(0).map(|_| Domain::unit_square()),
        "half_disc" => need(0).map(|_| Domain::half_disc()),
        "rectangle" => need(2).and_then(|_| Domain::rectangle(args[0], args[1])),
        "half_ellipse" => need(2).and_then(|_| Domain::half_ellipse(args[0], args[1])),
        "regular_polygon" => need(2).and_then(|_| {
            if args[0].fract() != 0.0 || args[0] < 3.0 {
                return Err(GeometryError::Spec("regular_polygon needs an integer n ≥ 3".into()));
            }
            Domain::regular_polygon(args[0] as usize, args[1])
        }),
        "wedge" => need(2).and_then(|_| Domain::wedge(args[0], args[1])),
        "disc" => match args.len() {
            0 => Domain::disc(1.0),
            1 => Domain::disc(args[0]),
            _ => Err(GeometryError::Spec("`disc` takes at most 1 argument".into())),
        },
        other => Err(GeometryError::Spec(format!("unknown builtin domain `{other}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_builtins_and_polygons() {
        let d = DomainSpec::parse("builtin = \"half_ellipse 2 1\"").unwrap().build().unwrap();
        assert_eq!(d.corners.len(), 2);
        let d = DomainSpec::parse("polygon = [[0, 0], [2, 0], [1, 1.5]]").unwrap().build().unwrap();
        assert_eq!(d.corners.len(), 3);
        let d = DomainSpec::builtin("regular_polygon 6 1").build().unwrap();
        assert_eq!(d.corners.len(), 6);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(DomainSpec::parse("builtin = \"rectangle 1\"").unwrap().build().is_err());
        assert!(DomainSpec::parse("builtin = \"blob\"").unwrap().build().is_err());
        assert!(DomainSpec::parse("colour = 3").is_err());
        assert!(DomainSpec::parse("").unwrap().build().is_err());
    }
}
