use std::fmt::Write as _;
use std::path::Path;

use super::{EigenError, Eigenpair};

/// Text archive of eigenpairs on one mesh: a header line with the mesh hash
/// and element order, the μ and residual lists, then one coefficient row per
/// pair. Floats use the shortest round-trip representation.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenArchive {
    pub mesh_hash: String,
    pub order: u8,
    pub pairs: Vec<Eigenpair>,
}

fn floats(line: &str, tag: &str) -> Result<Vec<f64>, EigenError> {
    let mut it = line.split_whitespace();
    if it.next() != Some(tag) {
        return Err(EigenError::Archive(format!("expected '{tag}' line")));
    }
    it.map(|s| s.parse::<f64>().map_err(|e| EigenError::Archive(format!("{tag}: {e}")))).collect()
}

impl EigenArchive {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "eigenpairs {} mesh {} order {}", self.pairs.len(), self.mesh_hash, self.order);
        let row = |tag: &str, v: &mut dyn Iterator<Item = f64>| {
            let mut line = tag.to_string();
            for x in v {
                let _ = write!(line, " {x:e}");
            }
            line
        };
        let _ = writeln!(s, "{}", row("mu", &mut self.pairs.iter().map(|p| p.mu)));
        let _ = writeln!(s, "{}", row("residual", &mut self.pairs.iter().map(|p| p.residual)));
        for p in &self.pairs {
            let _ = writeln!(s, "{}", row("u", &mut p.coeffs.iter().copied()));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, EigenError> {
        let mut lines = text.lines();
        let head: Vec<&str> = lines.next().unwrap_or("").split_whitespace().collect();
        let [_, count, _, hash, _, order] = head[..] else {
            return Err(EigenError::Archive("bad header".into()));
        };
        let count: usize = count.parse().map_err(|_| EigenError::Archive("bad count".into()))?;
        let order: u8 = order.parse().map_err(|_| EigenError::Archive("bad order".into()))?;
        let mu = floats(lines.next().unwrap_or(""), "mu")?;
        let residual = floats(lines.next().unwrap_or(""), "residual")?;
        if mu.len() != count || residual.len() != count {
            return Err(EigenError::Archive("list lengths differ from header".into()));
        }
        let mut pairs = Vec::with_capacity(count);
        for (mu, residual) in mu.into_iter().zip(residual) {
            let coeffs = floats(lines.next().ok_or_else(|| EigenError::Archive("missing coefficient row".into()))?, "u")?;
            pairs.push(Eigenpair { mu, coeffs, residual });
        }
        if let Some(n) = pairs.first().map(|p| p.coeffs.len()) {
            if pairs.iter().any(|p| p.coeffs.len() != n) {
                return Err(EigenError::Archive("ragged coefficient rows".into()));
            }
        }
        Ok(EigenArchive { mesh_hash: hash.to_string(), order, pairs })
    }

    pub fn save(&self, path: &Path) -> Result<(), EigenError> {
        Ok(std::fs::write(path, self.to_text())?)
    }

    pub fn load(path: &Path) -> Result<Self, EigenError> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}
