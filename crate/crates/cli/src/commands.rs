use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use pg_core::classes::{lie_poisson_mk, lie_poisson_ratio, modular_comparison, secondary_class, LieAlgebra};
use pg_core::connection::{canonical_poisson_connection, d_pi_residual, levi_civita_contra, ConnectionSymbols};
use pg_core::multivec::{MultiVectorField, PoissonStructure};
use pg_core::sampling::{random_multivector, random_one_form, rng, sample_points, Region};
use pg_core::transport::{
    check_cotangent, integrate_geodesic, line_integral, linear_holonomy, parallel_transport_covector, COTANGENT_TOLERANCE,
};
use pg_core::Expr;
use serde_json::{json, Map, Value};

use crate::manifest::{Manifest, ManifestError};
use crate::report::{matrix, number, numbers, Record};

pub const JACOBI_TOLERANCE: f64 = 1e-9;
pub const IDENTITY_TOLERANCE: f64 = 1e-10;
pub const CLASS_TOLERANCE: f64 = 1e-8;
pub const GINZBURG_GOLUBEV_TOLERANCE: f64 = 1e-6;
pub const MODULAR_TOLERANCE: f64 = 1e-8;
pub const CHECK_POINTS: usize = 100;
pub const MUSICAL_PAIRS: usize = 100;
const CLASS_POINTS: usize = 32;
const REPORTED_POINTS: usize = 5;

#[derive(Debug)]
pub enum CliError {
    /// Bad manifest, flags or expressions: exit 2.
    Input(String),
    /// A computation could not be carried out: exit 1.
    Compute(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) | CliError::Compute(m) => f.write_str(m),
        }
    }
}

impl From<ManifestError> for CliError {
    fn from(e: ManifestError) -> Self {
        CliError::Input(e.0)
    }
}

impl From<pg_core::Error> for CliError {
    fn from(e: pg_core::Error) -> Self {
        use pg_core::Error::*;
        match e {
            Parse(_) | Index(_) | DimensionMismatch { .. } | Invalid(_) => CliError::Input(e.to_string()),
            _ => CliError::Compute(e.to_string()),
        }
    }
}

impl From<pg_core::EvalError> for CliError {
    fn from(e: pg_core::EvalError) -> Self {
        CliError::Compute(format!("evaluation failed: {e}"))
    }
}

pub type Outcome = Result<Vec<Record>, CliError>;

fn max_over(field: &MultiVectorField, pts: &[Vec<f64>]) -> Result<f64, CliError> {
    Ok(field.max_abs_over(pts)?)
}

/// The property battery run by `pg check`.
pub fn battery(pi: &PoissonStructure, region: &Region, seed: u64, pairs: usize) -> Outcome {
    let m = pi.dim();
    let pts = sample_points(region, CHECK_POINTS, seed);
    let mut r = rng(seed);
    let mut out = Vec::new();

    out.push(Record::check("jacobiator", max_over(&pi.jacobiator(), &pts)?, JACOBI_TOLERANCE));
    out.push(Record::check("delta_pi", max_over(&pi.delta(&pi.bivector())?, &pts)?, IDENTITY_TOLERANCE));

    let mut dd = 0.0f64;
    for deg in 0..=m.saturating_sub(2) {
        let q = random_multivector(m, deg, 2, &mut r);
        dd = dd.max(max_over(&pi.delta(&pi.delta(&q)?)?, &pts)?);
    }
    out.push(Record::check("delta_squared", dd, IDENTITY_TOLERANCE));

    let mut leibniz = 0.0f64;
    for d1 in 0..m {
        let d2 = (m - 1 - d1).min(1);
        let q1 = random_multivector(m, d1, 2, &mut r);
        let q2 = random_multivector(m, d2, 2, &mut r);
        let lhs = pi.delta(&q1.wedge(&q2))?;
        let a = pi.delta(&q1)?.wedge(&q2);
        let b = q1.wedge(&pi.delta(&q2)?);
        let rhs = if d1 % 2 == 0 { a.plus(&b) } else { a.minus(&b) };
        leibniz = leibniz.max(max_over(&lhs.minus(&rhs), &pts)?);
    }
    out.push(Record::check("graded_leibniz", leibniz, IDENTITY_TOLERANCE));

    let a = random_one_form(m, 1, &mut r);
    let b = random_one_form(m, 1, &mut r);
    let q = random_multivector(m, 2.min(m), 2, &mut r);
    let ab = pi.koszul_bracket(&a, &b)?;
    let cartan_1 = pi.lie_derivative(&a, &q)?.minus(&pi.delta(&q)?.contract(&a)?.plus(&pi.delta(&q.contract(&a)?)?));
    let cartan_2 = q.contract(&ab)?.minus(&pi.lie_derivative(&a, &q.contract(&b)?)?.minus(&pi.lie_derivative(&a, &q)?.contract(&b)?));
    let la_lb = pi.lie_derivative(&a, &pi.lie_derivative(&b, &q)?)?;
    let lb_la = pi.lie_derivative(&b, &pi.lie_derivative(&a, &q)?)?;
    let cartan_3 = pi.lie_derivative(&ab, &q)?.minus(&la_lb.minus(&lb_la));
    let cartan = [cartan_1, cartan_2, cartan_3].iter().map(|f| max_over(f, &pts)).collect::<Result<Vec<_>, _>>()?;
    out.push(Record::check("cartan", cartan.into_iter().fold(0.0, f64::max), IDENTITY_TOLERANCE));

    let mut musical = 0.0f64;
    for _ in 0..pairs {
        let a = random_one_form(m, 2, &mut r);
        let b = random_one_form(m, 2, &mut r);
        let lhs = pi.sharp(&pi.koszul_bracket(&a, &b)?)?;
        let rhs = pi.sharp(&a)?.vector_bracket(&pi.sharp(&b)?);
        musical = musical.max(max_over(&lhs.minus(&rhs), &pts)?);
    }
    out.push(Record::check("musical_homomorphism", musical, IDENTITY_TOLERANCE).with_value(json!({ "pairs": pairs })));

    let dpi = d_pi_residual(pi, &canonical_poisson_connection(pi))?.max_abs_over(&pts)?;
    out.push(Record::check("canonical_connection_d_pi", dpi, IDENTITY_TOLERANCE));
    Ok(out)
}

pub fn check(man: &Manifest, seed: u64) -> Outcome {
    battery(&man.poisson, &man.region, seed, MUSICAL_PAIRS)
}

fn vector_arg(name: &str, v: &[f64], dim: usize) -> Result<(), CliError> {
    if v.len() != dim {
        return Err(CliError::Input(format!("--{name} needs {dim} comma-separated values, got {}", v.len())));
    }
    Ok(())
}

/// Trajectory CSV: `t, x1..xm, a1..am`, 17 significant digits.
pub fn write_trajectory_csv(path: &Path, traj: &pg_core::transport::Trajectory) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Input(format!("{}: {e}", path.display()));
    let m = traj.x.first().map_or(0, Vec::len);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    let header: Vec<String> = std::iter::once("t".to_string())
        .chain((1..=m).map(|i| format!("x{i}")))
        .chain((1..=m).map(|i| format!("a{i}")))
        .collect();
    writeln!(w, "{}", header.join(",")).map_err(io)?;
    for ((t, x), a) in traj.t.iter().zip(&traj.x).zip(&traj.alpha) {
        let row: Vec<String> = std::iter::once(t).chain(x).chain(a).map(|v| format!("{v:.16e}")).collect();
        writeln!(w, "{}", row.join(",")).map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn geodesic(man: &Manifest, x0: &[f64], alpha0: &[f64], t_end: f64, out: Option<&Path>) -> Outcome {
    vector_arg("x0", x0, man.dim)?;
    vector_arg("alpha0", alpha0, man.dim)?;
    if !t_end.is_finite() || t_end < 0.0 {
        return Err(CliError::Input(format!("--T must be a non-negative number, got {t_end}")));
    }
    let conn = man.connection()?;
    let traj = integrate_geodesic(&man.poisson, &conn, x0, alpha0, t_end, man.integrator)?;
    if let Some(p) = out {
        write_trajectory_csv(p, &traj)?;
    }
    let (x, a) = traj.end_point();
    Ok(vec![
        Record::info("connection", json!(conn.kind().name())),
        Record::info("steps", json!(man.integrator.steps)),
        Record::info("endpoint", json!({ "t": number(t_end), "x": numbers(x), "alpha": numbers(a) })),
    ])
}

pub fn transport(man: &Manifest, path_name: &str, beta0: &[f64]) -> Outcome {
    vector_arg("beta0", beta0, man.dim)?;
    let path = man.path(path_name)?;
    let conn = man.connection()?;
    let residual = check_cotangent(&man.poisson, path)?;
    let mut out = vec![Record::check("cotangent_residual", residual, COTANGENT_TOLERANCE)];
    if residual <= COTANGENT_TOLERANCE {
        let beta = parallel_transport_covector(&man.poisson, &conn, path, beta0, man.integrator)?;
        out.push(Record::info("transported_covector", numbers(&beta)));
    }
    Ok(out)
}

pub fn holonomy(man: &Manifest, path_name: &str, seed: u64) -> Outcome {
    let path = man.path(path_name)?;
    let conn = man.connection()?;
    let residual = check_cotangent(&man.poisson, path)?;
    if residual > COTANGENT_TOLERANCE {
        return Ok(vec![Record::check("cotangent_residual", residual, COTANGENT_TOLERANCE)]);
    }
    let h = linear_holonomy(&man.poisson, &conn, path, man.integrator)?;
    let mut out = vec![
        Record::check("cotangent_residual", h.path_residual, COTANGENT_TOLERANCE),
        Record::info("connection", json!(conn.kind().name())),
        Record::info("holonomy_matrix", matrix(&h.matrix.to_rows())),
        Record::info("determinant", number(h.determinant)),
    ];
    if let Some(mu) = &man.density {
        let samples = sample_points(&man.region, CLASS_POINTS, seed);
        let v = man.poisson.modular_vector_field(mu, &samples)?;
        let integral = line_integral(&man.poisson, &v, path, man.integrator)?;
        out.push(Record::info("modular_line_integral", number(integral)));
        out.push(
            Record::check("ginzburg_golubev", (h.determinant - integral.exp()).abs(), GINZBURG_GOLUBEV_TOLERANCE)
                .with_value(json!({ "exp_integral": number(integral.exp()) })),
        );
    }
    Ok(out)
}

pub fn integral(man: &Manifest, path_name: &str, seed: u64) -> Outcome {
    let path = man.path(path_name)?;
    let residual = check_cotangent(&man.poisson, path)?;
    let mut out = vec![Record::check("cotangent_residual", residual, COTANGENT_TOLERANCE)];
    let samples = sample_points(&man.region, CLASS_POINTS, seed);
    let v = man.poisson.modular_vector_field(&man.measure(), &samples)?;
    out.push(Record::info("closure_gap", number(path.closure_gap()?)));
    out.push(Record::info("modular_line_integral", number(line_integral(&man.poisson, &v, path, man.integrator)?)));
    Ok(out)
}

fn tuple_key(idx: &[usize]) -> String {
    idx.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(",")
}

fn components_at(field: &MultiVectorField, point: &[f64]) -> Result<Value, CliError> {
    let mut m = Map::new();
    for (idx, v) in field.eval(point)? {
        m.insert(tuple_key(&idx), number(v));
    }
    Ok(Value::Object(m))
}

fn centre(region: &Region) -> Vec<f64> {
    region.bounds.iter().map(|(lo, hi)| 0.5 * (lo + hi)).collect()
}

pub fn classes(man: &Manifest, ks: &[usize], seed: u64) -> Outcome {
    if ks.contains(&0) {
        return Err(CliError::Input("--k values must be positive".into()));
    }
    let pi = &man.poisson;
    let m = man.dim;
    let d1 = canonical_poisson_connection(pi);
    let d0 = match &man.metric {
        Some(g) => levi_civita_contra(pi, g)?,
        None => ConnectionSymbols::flat(m),
    };
    let pts = sample_points(&man.region, CLASS_POINTS, seed);
    let at = centre(&man.region);
    let mut out = vec![Record::info("connections", json!({ "upper": d1.kind().name(), "lower": d0.kind().name() }))];

    let algebra = match &man.lie_algebra {
        None => None,
        Some(spec) => {
            if spec.dim != m {
                return Err(CliError::Input(format!("[lie_algebra] dim {} differs from manifold dim {m}", spec.dim)));
            }
            let g = LieAlgebra::from_brackets(spec.dim, &spec.constants)?;
            let lp = g.lie_poisson();
            let mut gap = 0.0f64;
            for p in &pts {
                let (a, b) = (pi.eval(p)?, lp.eval(p)?);
                for (ra, rb) in a.iter().zip(&b) {
                    gap = ra.iter().zip(rb).fold(gap, |acc, (x, y)| acc.max((x - y).abs()));
                }
            }
            out.push(Record::check("lie_poisson_structure", gap, IDENTITY_TOLERANCE));
            Some(g)
        }
    };

    for &k in ks {
        let name = format!("m{k}");
        if 2 * k - 1 > m {
            out.push(Record::info(name, json!({ "degree": 2 * k - 1, "components": {}, "note": "degree exceeds dimension" })));
            continue;
        }
        let sec = match secondary_class(pi, &d1, &d0, k) {
            Ok(s) => s,
            Err(e @ pg_core::Error::NotFlat(_)) => {
                out.push(Record::failed(name, e.to_string()));
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        out.push(Record::info(
            name.clone(),
            json!({ "degree": 2 * k - 1, "at": numbers(&at), "components": components_at(&sec, &at)?, "max_abs": number(max_over(&sec, &pts)?) }),
        ));
        out.push(Record::check(format!("{name}_closedness"), max_over(&pi.delta(&sec)?, &pts)?, CLASS_TOLERANCE));

        if let Some(g) = &algebra {
            let closed = lie_poisson_mk(g, k);
            let closed_values = components_at(&closed, &at)?;
            match lie_poisson_ratio(k) {
                Some(rho) => {
                    let r = max_over(&sec.minus(&closed.scale(&Expr::constant(rho))), &pts)?;
                    out.push(
                        Record::check(format!("{name}_closed_form"), r, CLASS_TOLERANCE)
                            .with_value(json!({ "rho": number(rho), "closed_form": closed_values })),
                    );
                }
                None if closed.max_abs_over(&[at.clone()])? == 0.0 => {
                    out.push(
                        Record::check(format!("{name}_closed_form"), max_over(&sec, &pts)?, CLASS_TOLERANCE)
                            .with_value(json!({ "rho": Value::Null, "closed_form": closed_values })),
                    );
                }
                None => {
                    let (idx, c) = closed.eval(&at)?.into_iter().max_by(|a, b| a.1.abs().total_cmp(&b.1.abs())).expect("nonzero field");
                    let rho = sec.get(&idx).eval_at(&at)? / c;
                    let r = max_over(&sec.minus(&closed.scale(&Expr::constant(rho))), &pts)?;
                    out.push(
                        Record::check(format!("{name}_closed_form"), r, CLASS_TOLERANCE)
                            .with_value(json!({ "rho_measured": number(rho), "closed_form": closed_values })),
                    );
                }
            }
        }
    }
    Ok(out)
}

pub fn modular(man: &Manifest, seed: u64) -> Outcome {
    if man.metric.is_none() && man.density.is_none() {
        return Err(CliError::Input("modular needs a [metric] or [density] section".into()));
    }
    let pts = sample_points(&man.region, CHECK_POINTS, seed);
    if let Some(g) = &man.metric {
        g.check_positive(&pts)?;
    }
    let mu = man.measure();
    let v = man.poisson.modular_vector_field(&mu, &pts)?;
    let samples: Vec<Value> = pts
        .iter()
        .take(REPORTED_POINTS)
        .map(|p| {
            let vals: Vec<f64> = v.to_vec().iter().map(|e| e.eval_at(p)).collect::<Result<_, _>>()?;
            Ok(json!({ "x": numbers(p), "v": numbers(&vals) }))
        })
        .collect::<Result<_, CliError>>()?;
    let mut out = vec![Record::info("modular_vector_field", Value::Array(samples))];
    if let Some(g) = &man.metric {
        out.push(Record::check("modular_comparison", modular_comparison(&man.poisson, g, &pts)?, MODULAR_TOLERANCE));
    }
    Ok(out)
}
