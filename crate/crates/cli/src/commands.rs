use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use serde_json::{json, Value};
use syncvar::analysis::{gamma_grid, MapAnalysis};
use syncvar::exceptional::{isolate_gamma_roots, ExceptionalAnalysis};
use syncvar::map::{Side, SidedPoint};
use syncvar::markov::{regime_thresholds_with, validate_markov, CertifiedReal};
use syncvar::orbit::detect_eventual_orbit;
use syncvar::poly::RootEnclosure;
use syncvar::rational::{self, Rational};
use syncvar::sync::{eval_sync, sync_closed_value};
use syncvar::variation::UpperBound;
use syncvar::{Error, Gamma, MapDocument, PiecewiseAffineMap};

use crate::Format;

/// Orbit length tried before falling back to series evaluation under `--exact`.
const EXACT_ORBIT_CAP: usize = 256;

pub struct Options {
    pub format: Option<Format>,
    pub exact: bool,
}

pub struct CliError {
    pub code: u8,
    pub message: String,
    /// Output produced before the failure, printed anyway.
    pub partial: String,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError {
            code: if e.is_internal() { 3 } else { 1 },
            message: e.to_string(),
            partial: String::new(),
        }
    }
}

type CmdResult = Result<String, CliError>;

fn load(path: &Path) -> Result<(MapDocument, PiecewiseAffineMap), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError {
        code: 1,
        message: format!("cannot read {}: {e}", path.display()),
        partial: String::new(),
    })?;
    let doc = MapDocument::parse(&text)?;
    let map = doc.to_map()?;
    Ok((doc, map))
}

fn dec(x: f64) -> String {
    rational::format_sig(x, 15)
}

fn num(x: f64) -> Value {
    json!(rational::round_sig(x, 15))
}

fn rat(r: &Rational, exact: bool) -> String {
    if exact {
        rational::to_string(r)
    } else {
        dec(rational::to_f64(r))
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).unwrap_or_default();
    s.push('\n');
    s
}

fn certified(c: &CertifiedReal) -> Value {
    json!({"value": num(c.value), "lo": num(c.lo), "hi": num(c.hi)})
}

fn enclosure(r: &RootEnclosure) -> Value {
    json!({
        "enclosure": [rational::to_string(&r.lo), rational::to_string(&r.hi)],
        "midpoint": num(r.midpoint_f64()),
    })
}

pub fn validate(path: &Path, opts: &Options) -> CmdResult {
    let (doc, map) = load(path)?;
    let m = validate_markov(&map)?;
    let bad_atom = map.non_expanding_atom();
    let transitive = m.is_irreducible();
    let rows = m.to_u8_rows();
    let yes = |b: bool| if b { "yes" } else { "no" };
    let text = if opts.format == Some(Format::Json) {
        pretty(&json!({
            "name": doc.name,
            "atoms": map.atom_count(),
            "matrix": rows,
            "markov": true,
            "expanding": bad_atom.is_none(),
            "transitive": transitive,
        }))
    } else {
        let mut s = String::new();
        if let Some(name) = &doc.name {
            let _ = writeln!(s, "name: {name}");
        }
        let _ = writeln!(s, "atoms: {}", map.atom_count());
        let _ = writeln!(s, "matrix: {}", serde_json::to_string(&rows).unwrap_or_default());
        let _ = writeln!(s, "markov: yes");
        let _ = writeln!(s, "expanding: {}", yes(bad_atom.is_none()));
        let _ = writeln!(s, "transitive: {}", yes(transitive));
        s
    };
    let fail = |e: Error| CliError {
        code: 1,
        message: e.to_string(),
        partial: text.clone(),
    };
    if let Some(atom) = bad_atom {
        return Err(fail(Error::NotExpanding { atom: atom + 1 }));
    }
    if !transitive {
        return Err(fail(Error::NotTransitive));
    }
    doc.check_partition(&m).map_err(fail)?;
    Ok(text)
}

pub fn regimes(path: &Path, _opts: &Options) -> CmdResult {
    let (doc, map) = load(path)?;
    let a = MapAnalysis::new(map)?;
    let t = a.thresholds();
    let weights: Vec<String> = t.acim_weights.iter().map(rational::to_string).collect();
    Ok(pretty(&json!({
        "name": doc.name,
        "K": rational::to_string(&t.k),
        "lipschitz_gamma": num(rational::to_f64(&t.lipschitz_gamma)),
        "entropy_gamma": certified(&t.entropy_gamma),
        "lyapunov_gamma": certified(&t.lyapunov_gamma),
        "h_top": certified(&t.h_top),
        "lyap": certified(&t.lyap),
        "acim_weights": weights,
        "exceptional": a.exceptional().roots.iter().map(enclosure).collect::<Vec<_>>(),
    })))
}

pub fn exceptional(path: &Path, depth: usize, _opts: &Options) -> CmdResult {
    let (doc, map) = load(path)?;
    let m = validate_markov(&map)?;
    let t = regime_thresholds_with(&map, &m)?;
    let lo = rational::from_f64(t.entropy_gamma.lo.max(0.0))?;
    let ex = ExceptionalAnalysis::compute(&map, &lo, depth)?;
    let zero = Rational::from_integer(0.into());
    let one = Rational::from_integer(1.into());
    let polys: Vec<Value> = ex
        .polynomials
        .iter()
        .map(|p| {
            let roots = isolate_gamma_roots(p, &zero, &one);
            json!({
                "kind": p.kind,
                "coefficients": p.coefficients.to_strings(),
                "polynomial": p.coefficients.to_string(),
                "degree": p.degree(),
                "degree_bound": p.degree_bound,
                "roots_in_unit_interval": roots.iter().map(enclosure).collect::<Vec<_>>(),
            })
        })
        .collect();
    Ok(pretty(&json!({
        "name": doc.name,
        "witnesses": ex.witnesses,
        "polynomials": polys,
        "common": ex.common.to_strings(),
        "window": [rational::to_string(&ex.window.0), rational::to_string(&ex.window.1)],
        "roots": ex.roots.iter().map(enclosure).collect::<Vec<_>>(),
    })))
}

/// Uniform grid `i/(points-1)` plus both one-sided limits at every breakpoint, sorted by
/// `x` and then side.
fn graph_points(map: &PiecewiseAffineMap, points: usize) -> Result<Vec<SidedPoint>, Error> {
    let mut set: BTreeSet<(Rational, bool)> = BTreeSet::new();
    let denom = Rational::from_integer((points as i64 - 1).into());
    for i in 0..points {
        let x = Rational::from_integer((i as i64).into()) / &denom;
        if !map.is_breakpoint(&x) {
            set.insert((x, true));
        }
    }
    let last = map.breakpoints().len() - 1;
    for (i, c) in map.breakpoints().iter().enumerate() {
        if i > 0 {
            set.insert((c.clone(), false));
        }
        if i < last {
            set.insert((c.clone(), true));
        }
    }
    set.into_iter()
        .map(|(x, right)| SidedPoint::new(x, if right { Side::Right } else { Side::Left }))
        .collect()
}

pub fn graph(path: &Path, gamma: &Gamma, points: usize, tol: f64, opts: &Options) -> CmdResult {
    let (_, map) = load(path)?;
    let pts = graph_points(&map, points)?;
    let mut rows = Vec::with_capacity(pts.len());
    for p in &pts {
        let exact = if opts.exact {
            detect_eventual_orbit(&map, p, EXACT_ORBIT_CAP)
                .ok()
                .map(|o| sync_closed_value(gamma.value(), &o))
        } else {
            None
        };
        let (phi, err) = match exact {
            Some(v) => (rational::to_string(&v), "0".to_string()),
            None => {
                let v = eval_sync(&map, gamma, p, tol)?;
                (dec(v.value), dec(v.error_bound))
            }
        };
        rows.push((rat(p.x(), opts.exact), p.side().label(), phi, err));
    }
    if opts.format == Some(Format::Json) {
        let v: Vec<Value> = rows
            .iter()
            .map(|(x, s, phi, e)| json!({"x": x, "side": s, "phi": phi, "error_bound": e}))
            .collect();
        return Ok(pretty(&json!({"gamma": gamma, "tol": tol, "rows": v})));
    }
    let mut s = String::from("x,side,phi,error_bound\n");
    for (x, side, phi, e) in rows {
        let _ = writeln!(s, "{x},{side},{phi},{e}");
    }
    Ok(s)
}

fn upper_text(u: &UpperBound) -> String {
    match u.value() {
        Some(v) => dec(v),
        None => "infinite".into(),
    }
}

pub fn variation(path: &Path, gamma: &Gamma, depth: usize, kmax: usize, opts: &Options) -> CmdResult {
    let (_, map) = load(path)?;
    let a = MapAnalysis::new(map)?;
    let report = a.variation_report(gamma, depth, kmax)?;
    if opts.format == Some(Format::Csv) {
        let mut s = String::from("n,N_n,bound\n");
        for r in &report.growth {
            let _ = writeln!(s, "{},{},{}", r.n, r.count, rat(&r.bound, opts.exact));
        }
        return Ok(s);
    }
    let mut v = serde_json::to_value(&report).map_err(|e| CliError {
        code: 3,
        message: e.to_string(),
        partial: String::new(),
    })?;
    if opts.exact {
        let exact: Vec<String> = report
            .lower_bounds
            .iter()
            .map(|l| rational::to_string(&l.value))
            .collect();
        v["lower_bounds_exact"] = json!(exact);
        if let UpperBound::Finite { head, kmax, .. } = &report.upper_bound {
            v["upper_bound_head_exact"] = json!(rational::to_string(head));
            v["upper_bound_kmax"] = json!(kmax);
        }
    }
    Ok(pretty(&v))
}

pub fn scan(
    path: &Path,
    grid: (&Rational, &Rational, &Rational),
    depth: usize,
    kmax: usize,
    opts: &Options,
) -> CmdResult {
    let (_, map) = load(path)?;
    let a = MapAnalysis::new(map)?;
    let gammas = gamma_grid(grid.0, grid.1, grid.2)?;
    let rows = a.scan(&gammas, depth, kmax)?;
    if opts.format == Some(Format::Json) {
        let v: Vec<Value> = rows
            .iter()
            .map(|r| {
                json!({
                    "gamma": rat(r.gamma.value(), opts.exact),
                    "verdict": r.regime.label(),
                    "lower_bound": rat(&r.lower_bound, opts.exact),
                    "upper_bound": upper_text(&r.upper_bound),
                })
            })
            .collect();
        return Ok(pretty(&Value::Array(v)));
    }
    let mut s = String::from("gamma,verdict,lower_bound,upper_bound\n");
    for r in &rows {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            rat(r.gamma.value(), opts.exact),
            r.regime.label(),
            rat(&r.lower_bound, opts.exact),
            upper_text(&r.upper_bound)
        );
    }
    Ok(s)
}
