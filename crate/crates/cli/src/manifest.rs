//! Chart manifests: a TOML subset with dotted index keys.
//!
//! ```toml
//! [manifold]
//! dim = 3
//!
//! [poisson]
//! pi.1.2 = "x3"
//! pi.1.3 = "-x2"
//! pi.2.3 = "x1"
//! ```
//!
//! Indices are 1-based. Expression values are strings in the coordinate
//! language of `pg_core::expr`; plain numbers are accepted too.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use pg_core::connection::{canonical_poisson_connection, levi_civita_contra, ConnectionSymbols, Metric};
use pg_core::multivec::{DensityField, PoissonStructure};
use pg_core::sampling::Region;
use pg_core::transport::{CotangentPath, IntegratorConfig};
use pg_core::parse_expr;
use sha2::{Digest, Sha256};
use toml::{Table, Value};

#[derive(Debug)]
pub struct ManifestError(pub String);

impl fmt::Display for ManifestError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<pg_core::Error> for ManifestError {
    fn from(e: pg_core::Error) -> Self {
        ManifestError(e.to_string())
    }
}

impl From<pg_core::ParseError> for ManifestError {
    fn from(e: pg_core::ParseError) -> Self {
        ManifestError(e.to_string())
    }
}

type Result<T> = std::result::Result<T, ManifestError>;

fn err<T>(msg: impl Into<String>) -> Result<T> {
    Err(ManifestError(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConnectionChoice {
    Canonical,
    Flat,
    LeviCivita,
    Explicit,
}

#[derive(Debug, Clone)]
pub struct LieAlgebraSpec {
    pub dim: usize,
    /// `(i, j, k, c^k_{ij})`, 0-based with `i < j`.
    pub constants: Vec<(usize, usize, usize, f64)>,
}

#[derive(Debug, Clone)]
pub struct Manifest {
    pub dim: usize,
    pub region: Region,
    pub poisson: PoissonStructure,
    pub metric: Option<Metric>,
    pub connection: ConnectionChoice,
    explicit_symbols: Option<ConnectionSymbols>,
    pub lie_algebra: Option<LieAlgebraSpec>,
    pub paths: BTreeMap<String, CotangentPath>,
    pub density: Option<DensityField>,
    pub integrator: IntegratorConfig,
    pub sha256: String,
}

/// Flatten nested tables into `(index path, value)` pairs.
fn indexed<'a>(table: &'a Table, prefix: &str, depth: usize, dim: usize) -> Result<Vec<(Vec<usize>, &'a Value)>> {
    fn walk<'a>(v: &'a Value, key: &str, path: &mut Vec<usize>, depth: usize, dim: usize, out: &mut Vec<(Vec<usize>, &'a Value)>) -> Result<()> {
        if path.len() == depth {
            out.push((path.clone(), v));
            return Ok(());
        }
        let Value::Table(t) = v else {
            return err(format!("{key}: expected {depth} indices"));
        };
        for (k, sub) in t {
            let idx: usize = k.parse().map_err(|_| ManifestError(format!("{key}.{k}: index must be a positive integer")))?;
            if idx == 0 || idx > dim {
                return err(format!("{key}.{k}: index out of range 1..={dim}"));
            }
            path.push(idx - 1);
            walk(sub, &format!("{key}.{k}"), path, depth, dim, out)?;
            path.pop();
        }
        Ok(())
    }
    let mut out = Vec::new();
    if let Some(v) = table.get(prefix) {
        walk(v, prefix, &mut Vec::new(), depth, dim, &mut out)?;
    }
    Ok(out)
}

fn expr_source(v: &Value, key: &str) -> Result<String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Integer(i) => Ok(i.to_string()),
        Value::Float(f) => Ok(format!("{f:?}")),
        _ => err(format!("{key}: expected an expression string")),
    }
}

fn number(v: &Value, key: &str) -> Result<f64> {
    match v {
        Value::Integer(i) => Ok(*i as f64),
        Value::Float(f) => Ok(*f),
        _ => err(format!("{key}: expected a number")),
    }
}

fn section<'a>(doc: &'a Table, name: &str) -> Result<Option<&'a Table>> {
    match doc.get(name) {
        None => Ok(None),
        Some(Value::Table(t)) => Ok(Some(t)),
        Some(_) => err(format!("[{name}] must be a table")),
    }
}

fn check_keys(table: &Table, name: &str, allowed: &[&str]) -> Result<()> {
    match table.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => err(format!("[{name}]: unknown key '{k}'")),
        None => Ok(()),
    }
}

fn label(prefix: &str, idx: &[usize]) -> String {
    std::iter::once(prefix.to_string()).chain(idx.iter().map(|i| (i + 1).to_string())).collect::<Vec<_>>().join(".")
}

fn parse_region(v: &Value, dim: usize) -> Result<Region> {
    let bounds = |v: &Value| -> Result<(f64, f64)> {
        match v.as_array().map(|a| a.as_slice()) {
            Some([lo, hi]) => {
                let (lo, hi) = (number(lo, "region")?, number(hi, "region")?);
                if lo < hi {
                    Ok((lo, hi))
                } else {
                    err("region: lower bound must be below upper bound")
                }
            }
            _ => err("region: expected [lo, hi] or a list of [lo, hi] per coordinate"),
        }
    };
    let Some(arr) = v.as_array() else {
        return err("region: expected an array");
    };
    if arr.iter().all(|x| x.is_array()) {
        if arr.len() != dim {
            return err(format!("region: expected {dim} intervals, got {}", arr.len()));
        }
        Ok(Region::new(arr.iter().map(bounds).collect::<Result<_>>()?))
    } else {
        let b = bounds(v)?;
        Ok(Region::new(vec![b; dim]))
    }
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| ManifestError(format!("{}: {e}", path.display())))?;
        Self::from_str(&text)
    }

    pub fn from_str(text: &str) -> Result<Self> {
        let sha256 = format!("{:x}", Sha256::digest(text.as_bytes()));
        let doc: Table = text.parse().map_err(|e: toml::de::Error| ManifestError(format!("manifest: {}", e.message())))?;
        check_keys(&doc, "manifest", &["manifold", "poisson", "metric", "connection", "lie_algebra", "paths", "density", "integrator"])?;

        let manifold = section(&doc, "manifold")?.ok_or_else(|| ManifestError("missing [manifold] section".into()))?;
        check_keys(manifold, "manifold", &["dim", "region"])?;
        let dim = match manifold.get("dim").and_then(Value::as_integer) {
            Some(d) if d > 0 => d as usize,
            _ => return err("[manifold] dim must be a positive integer"),
        };
        let region = match manifold.get("region") {
            Some(v) => parse_region(v, dim)?,
            None => Region::cube(dim),
        };

        let poisson = section(&doc, "poisson")?.ok_or_else(|| ManifestError("missing [poisson] section".into()))?;
        check_keys(poisson, "poisson", &["pi"])?;
        let mut comps = Vec::new();
        for (idx, v) in indexed(poisson, "pi", 2, dim)? {
            let key = label("pi", &idx);
            if idx[0] >= idx[1] {
                return err(format!("{key}: indices must satisfy i<j"));
            }
            comps.push((idx[0], idx[1], parse_expr(&expr_source(v, &key)?, dim, false).map_err(|e| ManifestError(format!("{key}: {e}")))?));
        }
        let poisson = PoissonStructure::new(dim, comps)?;

        let metric = match section(&doc, "metric")? {
            None => None,
            Some(t) => {
                check_keys(t, "metric", &["g"])?;
                let mut entries = Vec::new();
                for (idx, v) in indexed(t, "g", 2, dim)? {
                    let key = label("g", &idx);
                    if idx[0] > idx[1] {
                        return err(format!("{key}: give the upper triangle, i<=j"));
                    }
                    entries.push((idx[0], idx[1], parse_expr(&expr_source(v, &key)?, dim, false).map_err(|e| ManifestError(format!("{key}: {e}")))?));
                }
                Some(Metric::from_upper(dim, entries)?)
            }
        };

        let (connection, explicit_symbols) = match section(&doc, "connection")? {
            None => (ConnectionChoice::Canonical, None),
            Some(t) => {
                check_keys(t, "connection", &["type", "gamma"])?;
                let kind = match t.get("type").and_then(Value::as_str) {
                    None | Some("canonical") => ConnectionChoice::Canonical,
                    Some("flat") => ConnectionChoice::Flat,
                    Some("levi_civita") => ConnectionChoice::LeviCivita,
                    Some("explicit") => ConnectionChoice::Explicit,
                    Some(other) => return err(format!("[connection] unknown type '{other}'")),
                };
                let entries = indexed(t, "gamma", 3, dim)?;
                if kind != ConnectionChoice::Explicit && !entries.is_empty() {
                    return err("[connection] gamma symbols require type = \"explicit\"");
                }
                if kind == ConnectionChoice::LeviCivita && metric.is_none() {
                    return err("[connection] levi_civita requires a [metric] section");
                }
                let symbols = if kind == ConnectionChoice::Explicit {
                    let parsed = entries
                        .into_iter()
                        .map(|(idx, v)| {
                            let key = label("gamma", &idx);
                            let e = parse_expr(&expr_source(v, &key)?, dim, false).map_err(|e| ManifestError(format!("{key}: {e}")))?;
                            Ok((idx[0], idx[1], idx[2], e))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    Some(ConnectionSymbols::explicit(dim, parsed)?)
                } else {
                    None
                };
                (kind, symbols)
            }
        };

        let lie_algebra = match section(&doc, "lie_algebra")? {
            None => None,
            Some(t) => {
                check_keys(t, "lie_algebra", &["dim", "c"])?;
                let n = match t.get("dim").and_then(Value::as_integer) {
                    Some(d) if d > 0 => d as usize,
                    _ => return err("[lie_algebra] dim must be a positive integer"),
                };
                let mut constants = Vec::new();
                for (idx, v) in indexed(t, "c", 3, n)? {
                    let key = label("c", &idx);
                    if idx[0] >= idx[1] {
                        return err(format!("{key}: indices must satisfy i<j"));
                    }
                    constants.push((idx[0], idx[1], idx[2], number(v, &key)?));
                }
                Some(LieAlgebraSpec { dim: n, constants })
            }
        };

        let mut paths = BTreeMap::new();
        if let Some(t) = section(&doc, "paths")? {
            for (name, v) in t {
                let Value::Table(p) = v else {
                    return err(format!("[paths.{name}] must be a table"));
                };
                check_keys(p, &format!("paths.{name}"), &["gamma", "alpha"])?;
                let read = |prefix: &str| -> Result<Vec<String>> {
                    let mut out = vec![None; dim];
                    for (idx, v) in indexed(p, prefix, 1, dim)? {
                        out[idx[0]] = Some(expr_source(v, &label(prefix, &idx))?);
                    }
                    out.into_iter()
                        .enumerate()
                        .map(|(i, s)| s.ok_or_else(|| ManifestError(format!("[paths.{name}] missing {prefix}.{}", i + 1))))
                        .collect()
                };
                let gamma = read("gamma")?;
                let alpha = read("alpha")?;
                let g: Vec<&str> = gamma.iter().map(String::as_str).collect();
                let a: Vec<&str> = alpha.iter().map(String::as_str).collect();
                let path = CotangentPath::parse(&g, &a).map_err(|e| ManifestError(format!("[paths.{name}] {e}")))?;
                paths.insert(name.clone(), path);
            }
        }

        let density = match section(&doc, "density")? {
            None => None,
            Some(t) => {
                check_keys(t, "density", &["weight"])?;
                let src = expr_source(t.get("weight").ok_or_else(|| ManifestError("[density] missing weight".into()))?, "weight")?;
                Some(DensityField::new(parse_expr(&src, dim, false).map_err(|e| ManifestError(format!("weight: {e}")))?))
            }
        };

        let integrator = match section(&doc, "integrator")? {
            None => IntegratorConfig::default(),
            Some(t) => {
                check_keys(t, "integrator", &["steps"])?;
                match t.get("steps") {
                    None => IntegratorConfig::default(),
                    Some(Value::Integer(n)) if *n > 0 => IntegratorConfig::new(*n as usize)?,
                    Some(_) => return err("[integrator] steps must be a positive integer"),
                }
            }
        };

        Ok(Manifest { dim, region, poisson, metric, connection, explicit_symbols, lie_algebra, paths, density, integrator, sha256 })
    }

    /// The connection named in the manifest (canonical when absent).
    pub fn connection(&self) -> Result<ConnectionSymbols> {
        Ok(match self.connection {
            ConnectionChoice::Canonical => canonical_poisson_connection(&self.poisson),
            ConnectionChoice::Flat => ConnectionSymbols::flat(self.dim),
            ConnectionChoice::LeviCivita => levi_civita_contra(&self.poisson, self.metric.as_ref().expect("checked at load"))?,
            ConnectionChoice::Explicit => self.explicit_symbols.clone().expect("parsed at load"),
        })
    }

    pub fn path(&self, name: &str) -> Result<&CotangentPath> {
        self.paths.get(name).ok_or_else(|| {
            let known: Vec<&str> = self.paths.keys().map(String::as_str).collect();
            ManifestError(format!("no path named '{name}' (known: {})", known.join(", ")))
        })
    }

    /// The density, falling back to `√det g` and then to Lebesgue measure.
    pub fn measure(&self) -> DensityField {
        match (&self.density, &self.metric) {
            (Some(d), _) => d.clone(),
            (None, Some(g)) => DensityField::new(g.det().sqrt()),
            (None, None) => DensityField::lebesgue(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use pg_core::Expr;

    const SO3: &str = r#"
[manifold]
dim = 3

[poisson]
pi.1.2 = "x3"
pi.1.3 = "-x2"
pi.2.3 = "x1"

[paths.circle]
gamma.1 = "cos(6.283185307179586*t)"
gamma.2 = "sin(6.283185307179586*t)"
gamma.3 = 0
alpha.1 = 0
alpha.2 = 0
alpha.3 = "-6.283185307179586"
"#;

    #[test]
    fn loads_sections() {
        let m = Manifest::from_str(SO3).unwrap();
        assert_eq!(m.dim, 3);
        assert_eq!(m.poisson.pi(1, 0).to_string(), Expr::coord(2).neg_expr().to_string());
        assert_eq!(m.connection, ConnectionChoice::Canonical);
        assert!(m.path("circle").is_ok());
        assert!(m.path("square").is_err());
        assert_eq!(m.sha256.len(), 64);
    }

    #[test]
    fn rejects_lower_indices() {
        let bad = "[manifold]\ndim = 2\n[poisson]\npi.2.1 = \"1\"\n";
        let e = Manifest::from_str(bad).unwrap_err();
        assert!(e.0.contains("indices must satisfy i<j"), "{e}");
    }

    #[test]
    fn rejects_out_of_range_and_unknown_keys() {
        assert!(Manifest::from_str("[manifold]\ndim = 2\n[poisson]\npi.1.3 = \"1\"\n").is_err());
        assert!(Manifest::from_str("[manifold]\ndim = 2\n[poisson]\npi.1.2 = \"x3\"\n").is_err());
        assert!(Manifest::from_str("[manifold]\ndim = 2\ncolour = 1\n[poisson]\n").is_err());
        assert!(Manifest::from_str("[manifold]\ndim = 2\n[poisson]\n[connection]\ntype = \"levi_civita\"\n").is_err());
    }

    #[test]
    fn region_forms() {
        let m = Manifest::from_str("[manifold]\ndim = 2\nregion = [0.5, 2.0]\n[poisson]\npi.1.2 = \"x1*x2\"\n").unwrap();
        assert_eq!(m.region.bounds, vec![(0.5, 2.0); 2]);
        let m = Manifest::from_str("[manifold]\ndim = 2\nregion = [[0, 1], [-2, 2]]\n[poisson]\n").unwrap();
        assert_eq!(m.region.bounds, vec![(0.0, 1.0), (-2.0, 2.0)]);
    }
}
