//! JSON interchange for operators, POVMs, stochastic matrices, parameter
//! points and reports, plus CSV export of chamber point clouds.
//!
//! Complex matrices are row-major arrays of `[re, im]` pairs; a bare number is
//! accepted on input as a real entry. Every float written out is rounded to
//! [`SIGNIFICANT_DIGITS`] significant digits.

use nalgebra::{Complex, DMatrix, DVector};
use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::bell::ChshResult;
use crate::chamber::{ChamberCloud, MeasurementSchedule, CHAMBER_CSV_HEADER};
use crate::error::{Error, Result};
use crate::estimation::ParamPoint;
use crate::incompat::{IncompatReport, RobustnessResult, UncertaintyReport};
use crate::operator::{CMatrix, HermitianOperator};
use crate::povm::{Effect, Povm, StochasticMatrix, ValidationReport};
use crate::scalar::Scalar;
use crate::sdp::{CertificateReport, InfeasibilityWitness, JointSolution, SdpSolution};

pub const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Deserialize)]
#[serde(untagged)]
enum RawEntry {
    Complex([f64; 2]),
    Real(f64),
}

type RawMatrix = Vec<Vec<RawEntry>>;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEffect {
    #[serde(default)]
    label: Option<String>,
    matrix: RawMatrix,
}

#[derive(Deserialize)]
struct RawPovm {
    dim: usize,
    effects: Vec<RawEffect>,
}

#[derive(Deserialize)]
struct RawStochastic {
    rows: usize,
    cols: usize,
    entries: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct RawPoint {
    rho: RawMatrix,
    tangents: Vec<RawMatrix>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawObservable {
    Wrapped { matrix: RawMatrix },
    Bare(RawMatrix),
}

fn parse<'a, D: Deserialize<'a>>(text: &'a str) -> Result<D> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

fn to_matrix<T: Scalar>(raw: &RawMatrix) -> Result<CMatrix<T>> {
    let n = raw.len();
    if n == 0 {
        return Err(Error::Parse("empty matrix".into()));
    }
    let cols = raw[0].len();
    if let Some(bad) = raw.iter().find(|r| r.len() != cols) {
        return Err(Error::DimensionMismatch { expected: cols, found: bad.len() });
    }
    Ok(DMatrix::from_fn(n, cols, |r, c| match raw[r][c] {
        RawEntry::Complex([re, im]) => Complex::new(T::lit(re), T::lit(im)),
        RawEntry::Real(re) => Complex::new(T::lit(re), T::zero()),
    }))
}

fn to_operator<T: Scalar>(raw: &RawMatrix) -> Result<HermitianOperator<T>> {
    HermitianOperator::new(to_matrix(raw)?)
}

/// Parses a POVM without checking positivity or completeness, so that invalid
/// inputs can still be reported on by [`crate::povm::validate`]. Shapes and
/// Hermiticity are checked.
pub fn povm_from_json<T: Scalar>(text: &str) -> Result<Povm<T>> {
    let raw: RawPovm = parse(text)?;
    if raw.effects.is_empty() {
        return Err(Error::InvalidPovm("no effects".into()));
    }
    let mut effects = Vec::with_capacity(raw.effects.len());
    for (k, e) in raw.effects.iter().enumerate() {
        let op = to_operator::<T>(&e.matrix)?;
        if op.dim() != raw.dim {
            return Err(Error::DimensionMismatch { expected: raw.dim, found: op.dim() });
        }
        effects.push(Effect::new(e.label.clone().unwrap_or_else(|| k.to_string()), op));
    }
    Ok(Povm::new_unchecked(raw.dim, effects))
}

pub fn stochastic_from_json<T: Scalar>(text: &str) -> Result<StochasticMatrix<T>> {
    let raw: RawStochastic = parse(text)?;
    if raw.entries.len() != raw.rows {
        return Err(Error::DimensionMismatch { expected: raw.rows, found: raw.entries.len() });
    }
    if let Some(bad) = raw.entries.iter().find(|r| r.len() != raw.cols) {
        return Err(Error::DimensionMismatch { expected: raw.cols, found: bad.len() });
    }
    StochasticMatrix::new(DMatrix::from_fn(raw.rows, raw.cols, |r, c| T::lit(raw.entries[r][c])))
}

pub fn param_point_from_json<T: Scalar>(text: &str) -> Result<ParamPoint<T>> {
    let raw: RawPoint = parse(text)?;
    let rho = to_operator(&raw.rho)?;
    let tangents = raw.tangents.iter().map(to_operator).collect::<Result<Vec<_>>>()?;
    ParamPoint::new(rho, tangents)
}

/// A Hermitian operator given either as a bare matrix or as `{"matrix": ...}`.
pub fn operator_from_json<T: Scalar>(text: &str) -> Result<HermitianOperator<T>> {
    match parse::<RawObservable>(text)? {
        RawObservable::Wrapped { matrix } | RawObservable::Bare(matrix) => to_operator(&matrix),
    }
}

/// Rounds to [`SIGNIFICANT_DIGITS`] significant digits.
pub fn round_significant(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().unwrap_or(x)
}

/// Applies [`round_significant`] to every float in the tree.
pub fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(x) = n.as_f64() {
                *v = num(round_significant(x));
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

fn real<T: Scalar>(x: T) -> Value {
    num(x.as_f64())
}

/// Pretty-printed JSON after rounding.
pub fn render(mut v: Value) -> String {
    round_value(&mut v);
    let mut s = serde_json::to_string_pretty(&v).expect("JSON values always serialize");
    s.push('\n');
    s
}

pub fn complex_matrix_to_json<T: Scalar>(m: &CMatrix<T>) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|r| Value::Array((0..m.ncols()).map(|c| json!([real(m[(r, c)].re), real(m[(r, c)].im)])).collect()))
            .collect(),
    )
}

pub fn real_matrix_to_json<T: Scalar>(m: &DMatrix<T>) -> Value {
    Value::Array((0..m.nrows()).map(|r| Value::Array((0..m.ncols()).map(|c| real(m[(r, c)])).collect())).collect())
}

fn vector_to_json<T: Scalar>(v: &DVector<Complex<T>>) -> Value {
    Value::Array(v.iter().map(|z| json!([real(z.re), real(z.im)])).collect())
}

pub fn operator_to_json<T: Scalar>(h: &HermitianOperator<T>) -> Value {
    complex_matrix_to_json(h.matrix())
}

pub fn povm_to_json<T: Scalar>(p: &Povm<T>) -> Value {
    json!({
        "dim": p.dim(),
        "effects": p.effects().iter()
            .map(|e| json!({ "label": e.label, "matrix": operator_to_json(&e.operator) }))
            .collect::<Vec<_>>(),
    })
}

pub fn stochastic_to_json<T: Scalar>(l: &StochasticMatrix<T>) -> Value {
    json!({ "rows": l.rows(), "cols": l.cols(), "entries": real_matrix_to_json(l.entries()) })
}

pub fn param_point_to_json<T: Scalar>(pt: &ParamPoint<T>) -> Value {
    json!({
        "rho": operator_to_json(pt.rho()),
        "tangents": pt.tangents().iter().map(operator_to_json).collect::<Vec<_>>(),
    })
}

pub fn validation_to_json<T: Scalar>(r: &ValidationReport<T>) -> Value {
    json!({
        "pass": r.pass(),
        "dimensions_consistent": r.dimensions_consistent,
        "positivity": r.positivity,
        "completeness": r.completeness,
        "min_eigenvalue": real(r.min_eigenvalue),
        "completeness_residual": real(r.completeness_residual),
        "tolerance": real(r.tolerance),
    })
}

pub fn certificate_to_json<T: Scalar>(c: &CertificateReport<T>) -> Value {
    json!({
        "certified": c.pass,
        "primal_margin": real(c.primal_margin),
        "dual_margin": real(c.dual_margin),
        "dual_residual": real(c.dual_residual),
        "gap": real(c.gap),
        "value_residual": real(c.value_residual),
        "tolerance": real(c.tolerance),
    })
}

/// Includes the primal and dual matrices; `certificate` supplies the
/// `certified` flag.
pub fn sdp_solution_to_json<T: Scalar>(s: &SdpSolution<T>, certificate: &CertificateReport<T>) -> Value {
    json!({
        "value": real(s.value),
        "lower_bound": real(s.lower_bound),
        "gap": real(s.gap),
        "primal_infeasibility": real(s.primal_infeasibility),
        "dual_infeasibility": real(s.dual_infeasibility),
        "iterations": s.iterations,
        "method": s.method.as_str(),
        "certified": certificate.pass,
        "margins": certificate_to_json(certificate),
        "primal": real_matrix_to_json(&s.primal),
        "duals": s.duals.iter().map(real_matrix_to_json).collect::<Vec<_>>(),
        "tolerance": real(s.tolerance),
    })
}

pub fn incompat_report_to_json<T: Scalar>(r: &IncompatReport<T>) -> Value {
    json!({
        "tau": real(r.tau),
        "threshold": real(r.threshold),
        "verdict": r.verdict.as_str(),
        "boundary": r.boundary,
        "normalized": real(r.normalized),
        "excess": real(r.excess),
        "tau_full": real(r.tau_full),
        "method": r.method.as_str(),
        "certificates": certificate_to_json(&r.certificate),
        "tolerance": real(r.tolerance),
    })
}

pub fn witness_to_json<T: Scalar>(w: &InfeasibilityWitness<T>) -> Value {
    json!({
        "certified": w.certified,
        "value": real(w.value),
        "psd_violation": real(w.psd_violation),
        "operators": w.operators.iter()
            .map(|ops| ops.iter().map(operator_to_json).collect::<Vec<_>>())
            .collect::<Vec<_>>(),
    })
}

pub fn joint_solution_to_json<T: Scalar>(s: &JointSolution<T>) -> Value {
    let mut m = Map::new();
    m.insert("status".into(), json!(s.status.as_str()));
    m.insert("feasible".into(), json!(s.feasible));
    m.insert("certified".into(), json!(s.certificate.as_ref().is_some_and(|w| w.certified)));
    m.insert("slack".into(), real(s.slack));
    m.insert("upper_bound".into(), real(s.upper_bound));
    m.insert("marginal_residual".into(), real(s.marginal_residual));
    m.insert("iterations".into(), json!(s.iterations));
    m.insert("tolerance".into(), real(s.tolerance));
    if let Some(j) = &s.joint {
        m.insert("joint".into(), povm_to_json(j));
    }
    if let Some(w) = &s.certificate {
        m.insert("certificate".into(), witness_to_json(w));
    }
    Value::Object(m)
}

pub fn robustness_to_json<T: Scalar>(r: &RobustnessResult<T>, tolerance: T) -> Value {
    json!({
        "epsilon": real(r.epsilon),
        "log_robustness": real(r.log_robustness),
        "lower_bound": real(r.lower_bound),
        "bracket": [real(r.bracket.0), real(r.bracket.1)],
        "tau": real(r.tau),
        "evaluations": r.evaluations,
        "warnings": r.warnings,
        "tolerance": real(tolerance),
    })
}

pub fn uncertainty_to_json<T: Scalar>(r: &UncertaintyReport<T>, tolerance: T) -> Value {
    json!({
        "t_value": real(r.t_value),
        "threshold": real(r.threshold),
        "verdict": r.verdict.as_str(),
        "boundary": r.boundary,
        "tolerance": real(tolerance),
    })
}

pub fn chsh_to_json<T: Scalar>(r: &ChshResult<T>, tolerance: T) -> Value {
    json!({
        "max_violation": real(r.max_violation),
        "theta": real(r.theta),
        "angles": r.angles.iter().map(|&a| real(a)).collect::<Vec<_>>(),
        "tau_restricted": r.tau_restricted.map(real),
        "optimal_subspace": r.optimal_subspace.as_ref().map(|(u, v)| json!([vector_to_json(u), vector_to_json(v)])),
        "tolerance": real(tolerance),
    })
}

pub fn schedule_to_json<T: Scalar>(s: &MeasurementSchedule<T>) -> Value {
    json!({
        "entries": s.entries.iter()
            .map(|e| json!({ "axis": e.axis.iter().map(|&x| real(x)).collect::<Vec<_>>(), "probability": real(e.probability) }))
            .collect::<Vec<_>>(),
        "trivial_weight": real(s.trivial_weight),
    })
}

pub fn chamber_metadata<T: Scalar>(c: &ChamberCloud<T>) -> Value {
    json!({
        "s": c.s.iter().map(|&x| real(x)).collect::<Vec<_>>(),
        "seed": c.seed,
        "n": c.points.len(),
        "columns": CHAMBER_CSV_HEADER.split(',').collect::<Vec<_>>(),
    })
}

fn format_float(x: f64) -> String {
    let v = num(round_significant(x));
    v.to_string()
}

/// CSV body with header line, one row per point.
pub fn chamber_csv<T: Scalar>(c: &ChamberCloud<T>) -> String {
    let mut out = String::from(CHAMBER_CSV_HEADER);
    out.push('\n');
    for p in &c.points {
        let row: Vec<String> = p.iter().map(|x| format_float(x.as_f64())).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::povm::{self, pauli_povm, PauliAxis};
    use crate::random;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn povm_round_trip() {
        for p in [pauli_povm::<f64>(PauliAxis::Y), povm::trine_qubit()] {
            let text = render(povm_to_json(&p));
            let back = povm_from_json::<f64>(&text).unwrap();
            assert_eq!(back.len(), p.len());
            for (a, b) in back.effects().iter().zip(p.effects()) {
                assert_eq!(a.label, b.label);
                assert!(a.operator.approx_eq(&b.operator, 1e-11));
            }
        }
    }

    #[test]
    fn real_entries_are_accepted() {
        let text = r#"{"dim": 2, "effects": [
            {"label": "0", "matrix": [[1, 0], [0, 0]]},
            {"label": "1", "matrix": [[[0, 0], [0, 0]], [[0, 0], [1, 0]]]}]}"#;
        let p = povm_from_json::<f64>(text).unwrap();
        assert!(povm::validate(&p, 1e-9).pass());
    }

    #[test]
    fn invalid_effects_parse_but_fail_validation() {
        let text = r#"{"dim": 2, "effects": [
            {"label": "a", "matrix": [[1.2, 0], [0, 1]]},
            {"label": "b", "matrix": [[-0.2, 0], [0, 0]]}]}"#;
        let p = povm_from_json::<f64>(text).unwrap();
        assert!(!povm::validate(&p, 1e-9).pass());
    }

    #[test]
    fn malformed_inputs() {
        let e = povm_from_json::<f64>("{\"dim\": 2, \"effects\": [").unwrap_err();
        assert!(matches!(&e, Error::Parse(m) if m.contains("line 1")), "{e}");
        let wrong_dim = r#"{"dim": 3, "effects": [{"label": "x", "matrix": [[1, 0], [0, 1]]}]}"#;
        assert!(matches!(povm_from_json::<f64>(wrong_dim), Err(Error::DimensionMismatch { .. })));
        let ragged = r#"{"dim": 2, "effects": [{"matrix": [[1, 0], [0]]}]}"#;
        assert!(matches!(povm_from_json::<f64>(ragged), Err(Error::DimensionMismatch { .. })));
        let non_herm = r#"{"dim": 2, "effects": [{"matrix": [[1, 1], [0, 0]]}]}"#;
        assert!(matches!(povm_from_json::<f64>(non_herm), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn stochastic_and_point_round_trip() {
        let l = StochasticMatrix::<f64>::uniform_noise(3, 0.4).unwrap();
        let back = stochastic_from_json::<f64>(&render(stochastic_to_json(&l))).unwrap();
        assert!((back.entries() - l.entries()).amax() < 1e-12);
        assert!(stochastic_from_json::<f64>(r#"{"rows": 2, "cols": 1, "entries": [[0.5], [0.6]]}"#).is_err());

        let pt = crate::estimation::qubit_bloch_point([0.1, -0.2, 0.3]).unwrap();
        let back = param_point_from_json::<f64>(&render(param_point_to_json(&pt))).unwrap();
        assert!(back.rho().approx_eq(pt.rho(), 1e-12));
        assert_eq!(back.num_params(), 3);
    }

    #[test]
    fn operator_forms() {
        let bare = operator_from_json::<f64>("[[0, 1], [1, 0]]").unwrap();
        let wrapped = operator_from_json::<f64>(r#"{"matrix": [[0, 1], [1, 0]]}"#).unwrap();
        assert!(bare.approx_eq(&HermitianOperator::pauli_x(), 0.0));
        assert!(wrapped.approx_eq(&bare, 0.0));
    }

    #[test]
    fn rounding_examples() {
        assert_eq!(round_significant(1.0 / 7.0), 0.142857142857);
        assert_eq!(round_significant(2.0), 2.0);
        assert_eq!(round_significant(-1.0 / 3.0), -0.333333333333);
        assert_eq!(round_significant(1.23456789012345e-20), 1.23456789012e-20);
        assert_eq!(round_significant(0.0), 0.0);
        let mut v = json!({"a": [1.0 / 3.0, 2], "b": {"c": 2.0f64.sqrt()}});
        round_value(&mut v);
        assert_eq!(v.to_string(), r#"{"a":[0.333333333333,2],"b":{"c":1.41421356237}}"#);
    }

    #[test]
    fn csv_layout() {
        let cloud = crate::chamber::chamber_export_seeded([0.0; 3], 3, 5).unwrap();
        let csv = chamber_csv(&cloud);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CHAMBER_CSV_HEADER);
        assert_eq!(lines.len(), 4);
        for line in &lines[1..] {
            assert_eq!(line.split(',').count(), 6);
        }
        assert_eq!(chamber_metadata(&cloud)["n"], 3);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn random_povms_round_trip_within_rounding(seed in any::<u64>(), d in 2usize..5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = random::povm::<f64, _>(&mut rng, d, d + 1);
            let back = povm_from_json::<f64>(&render(povm_to_json(&p))).unwrap();
            for (a, b) in back.effects().iter().zip(p.effects()) {
                prop_assert!(a.operator.approx_eq(&b.operator, 1e-11));
            }
            prop_assert!(povm::validate(&back, 1e-9).pass());
        }
    }
}
