//! Transition matrices, the stochastic group, the generator cone 𝔰⁺ and
//! checks on families `P(s, t)`.

pub mod io;
pub mod simulate;

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{expm, DenseMatrix, DenseVector};

pub use simulate::{simulate_chain, SimulationReport};

/// Tolerances for user-supplied probabilistic data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValidationTolerance {
    /// Entries (off-diagonal entries for generators) must be `≥ −negative`.
    pub negative: f64,
    /// Row sums must be within this of their target.
    pub row_sum: f64,
}

impl Default for ValidationTolerance {
    fn default() -> Self {
        Self {
            negative: 1e-12,
            row_sum: 1e-9,
        }
    }
}

/// Nonsingularity threshold on `σ_min / σ_max`.
pub const SINGULAR_RATIO: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MatrixClass {
    /// Transition matrix, possibly singular.
    #[serde(rename = "S0_plus")]
    S0Plus,
    /// Nonsingular transition matrix.
    #[serde(rename = "S_plus")]
    SPlus,
    /// Nonsingular with unit row sums, some entry negative.
    #[serde(rename = "S_group")]
    SGroup,
    #[serde(rename = "none")]
    None,
}

impl fmt::Display for MatrixClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MatrixClass::S0Plus => "S0_plus",
            MatrixClass::SPlus => "S_plus",
            MatrixClass::SGroup => "S_group",
            MatrixClass::None => "none",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub clause: &'static str,
    pub row: Option<usize>,
    pub col: Option<usize>,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MatrixCheck {
    pub n: usize,
    pub class: MatrixClass,
    pub min_entry: f64,
    pub max_row_sum_deviation: f64,
    pub singular_value_ratio: f64,
    /// Clauses that keep the matrix out of `S_plus`.
    pub violations: Vec<Violation>,
}

fn row_sum_violations(p: &DenseMatrix, target: f64, tol: f64, out: &mut Vec<Violation>) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, s) in p.row_sums().as_slice().iter().enumerate() {
        let dev = (s - target).abs();
        worst = worst.max(dev);
        if dev > tol {
            out.push(Violation {
                clause: "row_sums",
                row: Some(i),
                col: None,
                value: *s,
            });
        }
    }
    worst
}

fn require_square(p: &DenseMatrix, op: &'static str) -> Result<()> {
    if p.is_square() {
        Ok(())
    } else {
        Err(Error::Shape {
            op,
            left: (p.rows(), p.rows()),
            right: p.shape(),
        })
    }
}

pub fn check_matrix(p: &DenseMatrix, tol: ValidationTolerance) -> Result<MatrixCheck> {
    check_matrix_impl(p, tol, None)
}

/// `known_nonsingular` replaces the numerical singular-value test.
fn check_matrix_impl(p: &DenseMatrix, tol: ValidationTolerance, known_nonsingular: Option<bool>) -> Result<MatrixCheck> {
    require_square(p, "check_matrix")?;
    let n = p.rows();
    let mut violations = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if p[(i, j)] < -tol.negative {
                violations.push(Violation {
                    clause: "nonnegativity",
                    row: Some(i),
                    col: Some(j),
                    value: p[(i, j)],
                });
            }
        }
    }
    let negative = !violations.is_empty();
    let max_row_sum_deviation = row_sum_violations(p, 1.0, tol.row_sum, &mut violations);
    let unit_rows = max_row_sum_deviation <= tol.row_sum;
    let sv = p.singular_values();
    let ratio = sv.last().copied().unwrap_or(0.0) / sv[0].max(f64::MIN_POSITIVE);
    let nonsingular = known_nonsingular.unwrap_or(ratio > SINGULAR_RATIO);
    if !nonsingular {
        violations.push(Violation {
            clause: "nonsingular",
            row: None,
            col: None,
            value: ratio,
        });
    }
    let class = match (unit_rows, negative, nonsingular) {
        (true, false, true) => MatrixClass::SPlus,
        (true, false, false) => MatrixClass::S0Plus,
        (true, true, true) => MatrixClass::SGroup,
        _ => MatrixClass::None,
    };
    Ok(MatrixCheck {
        n,
        class,
        min_entry: p.min_entry(),
        max_row_sum_deviation,
        singular_value_ratio: ratio,
        violations,
    })
}

/// `S0_plus`, `S_plus`, `S_group` or `none`.
pub fn classify_matrix(p: &DenseMatrix, tol: ValidationTolerance) -> MatrixClass {
    check_matrix(p, tol).map_or(MatrixClass::None, |c| c.class)
}

/// Nonnegative matrix with unit row sums.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitionMatrix {
    p: DenseMatrix,
}

impl TransitionMatrix {
    pub fn new(p: DenseMatrix, tol: ValidationTolerance) -> Result<Self> {
        let check = check_matrix(&p, tol)?;
        if let Some(v) = check.violations.iter().find(|v| v.clause != "nonsingular") {
            return Err(Error::domain(format!("not a transition matrix: {} violated ({v:?})", v.clause)));
        }
        Ok(Self { p })
    }

    pub fn n(&self) -> usize {
        self.p.rows()
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.p
    }
}

/// Element of 𝔰⁺: zero row sums, nonnegative off-diagonal entries.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneratorCone {
    a: DenseMatrix,
}

impl GeneratorCone {
    pub fn new(a: DenseMatrix, tol: ValidationTolerance) -> Result<Self> {
        let v = cone_violations(&a, tol)?;
        if let Some(v) = v.first() {
            return Err(Error::domain(format!("not in the generator cone: {} violated ({v:?})", v.clause)));
        }
        Ok(Self { a })
    }

    pub fn n(&self) -> usize {
        self.a.rows()
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.a
    }

    /// Off-diagonal `c/(n−1)`, diagonal `−c`.
    pub fn uniform(n: usize, c: f64) -> Self {
        let off = c / (n - 1) as f64;
        Self {
            a: DenseMatrix::from_fn(n, n, |i, j| if i == j { -c } else { off }),
        }
    }
}

pub fn cone_violations(a: &DenseMatrix, tol: ValidationTolerance) -> Result<Vec<Violation>> {
    require_square(a, "generator cone")?;
    let n = a.rows();
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j && a[(i, j)] < -tol.negative {
                out.push(Violation {
                    clause: "off_diagonal_nonnegativity",
                    row: Some(i),
                    col: Some(j),
                    value: a[(i, j)],
                });
            }
        }
    }
    row_sum_violations(a, 0.0, tol.row_sum, &mut out);
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct FamilyEntry {
    pub s: f64,
    pub t: f64,
    pub matrix: TransitionMatrix,
}

/// Transition matrices `P(s, t)` for some pairs `s ≤ t` of a time grid.
#[derive(Debug, Clone, Serialize)]
pub struct TransitionFamily {
    times: Vec<f64>,
    entries: Vec<FamilyEntry>,
}

impl TransitionFamily {
    pub fn new(mut times: Vec<f64>, entries: Vec<(f64, f64, DenseMatrix)>, tol: ValidationTolerance) -> Result<Self> {
        if let Some(t) = times.iter().find(|t| !t.is_finite() || **t < 0.0) {
            return Err(Error::domain(format!("time {t} is not a non-negative real")));
        }
        times.sort_by(f64::total_cmp);
        times.dedup();
        let mut n = None;
        let mut out: Vec<FamilyEntry> = Vec::with_capacity(entries.len());
        for (s, t, m) in entries {
            if !times.contains(&s) || !times.contains(&t) {
                return Err(Error::domain(format!("pair ({s}, {t}) uses a time outside the grid")));
            }
            if s > t {
                return Err(Error::domain(format!("pair ({s}, {t}) has s > t")));
            }
            if *n.get_or_insert(m.rows()) != m.rows() {
                return Err(Error::domain(format!("P({s}, {t}) has size {} but earlier matrices have size {}", m.rows(), n.unwrap_or(0))));
            }
            if out.iter().any(|e| e.s == s && e.t == t) {
                return Err(Error::domain(format!("pair ({s}, {t}) appears twice")));
            }
            let matrix = TransitionMatrix::new(m, tol).map_err(|e| Error::domain(format!("P({s}, {t}): {e}")))?;
            if s == t {
                let dev = (matrix.matrix() - &DenseMatrix::identity(matrix.n())).max_abs();
                if dev > tol.row_sum {
                    return Err(Error::domain(format!("P({t}, {t}) differs from the identity by {dev:e}")));
                }
            }
            out.push(FamilyEntry { s, t, matrix });
        }
        Ok(Self { times, entries: out })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn entries(&self) -> &[FamilyEntry] {
        &self.entries
    }

    pub fn get(&self, s: f64, t: f64) -> Option<&DenseMatrix> {
        self.entries
            .iter()
            .find(|e| e.s == s && e.t == t)
            .map(|e| e.matrix.matrix())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TripleResult {
    pub s: f64,
    pub u: f64,
    pub t: f64,
    /// `max |P(s,t) − P(u,t)P(s,u)|`.
    pub written_order: f64,
    /// `max |P(s,t) − P(s,u)P(u,t)|`.
    pub reversed_order: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SemigroupReport {
    pub triples_checked: usize,
    pub written_order_max_deviation: f64,
    pub reversed_order_max_deviation: f64,
    /// `"written"`, `"reversed"`, `"both"`, `"neither"` or `"vacuous"`.
    pub order: &'static str,
    /// Triples satisfying neither order.
    pub flagged: Vec<TripleResult>,
    pub coverage_warnings: Vec<String>,
    pub passes: bool,
}

/// Compares `P(s,t)` with `P(u,t)P(s,u)` and with `P(s,u)P(u,t)` for every
/// stored triple `s < u < t`.
pub fn check_semigroup(family: &TransitionFamily, tol: f64) -> SemigroupReport {
    let mut written: f64 = 0.0;
    let mut reversed: f64 = 0.0;
    let mut flagged = Vec::new();
    let mut warnings = Vec::new();
    let mut checked = 0;
    for e in family.entries().iter().filter(|e| e.s < e.t) {
        let mut covered = false;
        for &u in family.times().iter().filter(|&&u| e.s < u && u < e.t) {
            let (Some(psu), Some(put)) = (family.get(e.s, u), family.get(u, e.t)) else {
                continue;
            };
            covered = true;
            checked += 1;
            let pst = e.matrix.matrix();
            let w = (pst - &(put * psu)).max_abs();
            let r = (pst - &(psu * put)).max_abs();
            written = written.max(w);
            reversed = reversed.max(r);
            if w > tol && r > tol {
                flagged.push(TripleResult {
                    s: e.s,
                    u,
                    t: e.t,
                    written_order: w,
                    reversed_order: r,
                });
            }
        }
        if !covered {
            warnings.push(format!("P({}, {}) has no stored intermediate pair", e.s, e.t));
        }
    }
    let (hw, hr) = (written <= tol, reversed <= tol);
    let order = match (checked, hw, hr) {
        (0, _, _) => "vacuous",
        (_, true, true) => "both",
        (_, true, false) => "written",
        (_, false, true) => "reversed",
        _ => "neither",
    };
    SemigroupReport {
        triples_checked: checked,
        written_order_max_deviation: written,
        reversed_order_max_deviation: reversed,
        order,
        passes: order != "neither",
        flagged,
        coverage_warnings: warnings,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FlowPoint {
    pub t: f64,
    /// `log det exp(tA) = t·tr A`.
    pub log_determinant: f64,
    pub class: MatrixClass,
    pub min_entry: f64,
    pub row_sum_deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FlowReport {
    pub points: Vec<FlowPoint>,
    pub min_entry: f64,
    pub max_row_sum_deviation: f64,
    pub passes: bool,
}

/// `exp(tA)` for each `t` in the grid must be a nonsingular transition matrix.
/// Nonsingularity is certified by `det exp(tA) = e^{t·tr A} > 0`.
pub fn flow_invariance(a: &GeneratorCone, t_grid: &[f64], tol: ValidationTolerance) -> Result<FlowReport> {
    if let Some(t) = t_grid.iter().find(|t| !t.is_finite() || **t < 0.0) {
        return Err(Error::domain(format!("time {t} is not a non-negative real")));
    }
    let mut points = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let p = expm(&a.matrix().scaled(t))?;
        let check = check_matrix_impl(&p, tol, Some(true))?;
        points.push(FlowPoint {
            t,
            log_determinant: t * a.matrix().trace(),
            class: check.class,
            min_entry: check.min_entry,
            row_sum_deviation: check.max_row_sum_deviation,
        });
    }
    Ok(FlowReport {
        min_entry: points.iter().map(|p| p.min_entry).fold(f64::INFINITY, f64::min),
        max_row_sum_deviation: points.iter().map(|p| p.row_sum_deviation).fold(0.0, f64::max),
        passes: points.iter().all(|p| p.class == MatrixClass::SPlus),
        points,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DualActionReport {
    /// `|(pP)x − p(Px)|`.
    pub associativity_residual: f64,
    pub mass_before: f64,
    pub mass_after: f64,
    pub mass_residual: f64,
}

/// Measures act on the right, functions on the left: `(pP)x = p(Px)`, and `pP𝟏 = p𝟏`.
pub fn dual_action_check(p: &TransitionMatrix, measure: &DenseVector, x: &DenseVector) -> Result<DualActionReport> {
    let pm = p.matrix();
    let left = pm.left_mul_vec(measure)?;
    let right = pm.mul_vec(x)?;
    let mass_before = measure.sum();
    let mass_after = left.sum();
    Ok(DualActionReport {
        associativity_residual: (left.dot(x) - measure.dot(&right)).abs(),
        mass_before,
        mass_after,
        mass_residual: (mass_after - mass_before).abs(),
    })
}
