//! Value- and probability-assignment feasibility over effect sets.
//!
//! An assignment problem is a deduplicated list of effects plus the linear
//! relations among them (POVM memberships, coarse-graining sums, scalar
//! multiples). Deterministic mode searches 0/1 valuations; spectral mode
//! searches assignments drawn from each effect's merged spectrum. Both
//! enumerations are exhaustive, so an empty result certifies infeasibility.
//!
//! Effect identity is matrix equality within `TAU_DEDUP`: two measurement
//! outcomes share an assignment variable exactly when their effects are
//! numerically equal. Relations are explicit inputs; nothing is
//! auto-discovered.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::measurement::Povm;
use crate::operator::{
    is_projector, spectral_decompose, ComplexMatrix, DensityOperator, Effect, HermitianOperator,
};
use crate::report::Report;
use crate::tol::{TAU_DEDUP, TAU_DEGEN, TAU_EIG, TAU_SUM};
use crate::Result;

/// Which family of assignments to search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AssignmentMode {
    /// Every effect gets a value in {0, 1}.
    Deterministic,
    /// Every effect gets a value from its merged spectrum.
    Spectral,
}

/// A linear relation among the problem's effects.
#[derive(Debug, Clone, PartialEq)]
pub enum Relation {
    /// The indexed effects (with repetition) sum to the identity; an
    /// assignment must give them total weight 1.
    Povm { indices: Vec<usize> },
    /// E_target = sum_i coeffs[i] * E_sources[i]; assignments must satisfy
    /// the same linear equation.
    Sum {
        target: usize,
        sources: Vec<usize>,
        coeffs: Vec<f64>,
    },
    /// E_target = factor * E_source.
    Scale {
        target: usize,
        source: usize,
        factor: f64,
    },
}

impl Relation {
    fn indices(&self) -> Vec<usize> {
        match self {
            Relation::Povm { indices } => indices.clone(),
            Relation::Sum {
                target, sources, ..
            } => {
                let mut v = vec![*target];
                v.extend(sources);
                v
            }
            Relation::Scale { target, source, .. } => vec![*target, *source],
        }
    }

    /// |lhs - rhs| of the relation evaluated on scalar values.
    fn residual(&self, values: &[f64]) -> f64 {
        match self {
            Relation::Povm { indices } => {
                let total: f64 = indices.iter().map(|&i| values[i]).sum();
                (total - 1.0).abs()
            }
            Relation::Sum {
                target,
                sources,
                coeffs,
            } => {
                let rhs: f64 = sources
                    .iter()
                    .zip(coeffs)
                    .map(|(&i, &c)| c * values[i])
                    .sum();
                (values[*target] - rhs).abs()
            }
            Relation::Scale {
                target,
                source,
                factor,
            } => (values[*target] - factor * values[*source]).abs(),
        }
    }

    /// Max-abs residual of the relation evaluated on the effect matrices.
    fn operator_residual(&self, effects: &[Effect]) -> f64 {
        let dim = effects[0].dim();
        match self {
            Relation::Povm { indices } => {
                let mut acc = HermitianOperator::zeros(dim);
                for &i in indices {
                    acc = acc.add(effects[i].op());
                }
                acc.sub(&HermitianOperator::identity(dim)).matrix().max_abs()
            }
            Relation::Sum {
                target,
                sources,
                coeffs,
            } => {
                let mut acc = HermitianOperator::zeros(dim);
                for (&i, &c) in sources.iter().zip(coeffs) {
                    acc = acc.add(&effects[i].op().scale(c));
                }
                effects[*target].op().sub(&acc).matrix().max_abs()
            }
            Relation::Scale {
                target,
                source,
                factor,
            } => effects[*target]
                .op()
                .sub(&effects[*source].op().scale(*factor))
                .matrix()
                .max_abs(),
        }
    }
}

/// A set of distinct effects, the registered relations among them, and the
/// search mode.
#[derive(Debug, Clone)]
pub struct AssignmentProblem {
    effects: Vec<Effect>,
    relations: Vec<Relation>,
    mode: AssignmentMode,
}

impl AssignmentProblem {
    pub fn new(
        effects: Vec<Effect>,
        relations: Vec<Relation>,
        mode: AssignmentMode,
    ) -> Result<Self> {
        for (i, a) in effects.iter().enumerate() {
            for b in &effects[i + 1..] {
                if a.op().approx_eq(b.op(), TAU_DEDUP) {
                    return Err(Error::InvalidProblem(format!(
                        "effects must be distinct: index {i} duplicates another entry"
                    )));
                }
            }
        }
        for (ri, rel) in relations.iter().enumerate() {
            if rel.indices().iter().any(|&i| i >= effects.len()) {
                return Err(Error::InvalidProblem(format!(
                    "relation {ri} references an effect index out of range"
                )));
            }
            if effects.is_empty() {
                return Err(Error::InvalidProblem(
                    "relations require at least one effect".into(),
                ));
            }
            let residual = rel.operator_residual(&effects);
            if residual > TAU_SUM {
                return Err(Error::InvalidProblem(format!(
                    "relation {ri} fails on the operators: residual {residual:.3e}"
                )));
            }
        }
        Ok(Self {
            effects,
            relations,
            mode,
        })
    }

    /// Build from a list of POVMs, deduplicating effects across and within
    /// POVMs and registering one membership relation per POVM. Repeated
    /// effects inside one POVM repeat their index inside the relation.
    pub fn from_povms(povms: &[Povm], mode: AssignmentMode) -> Result<Self> {
        let mut effects: Vec<Effect> = Vec::new();
        let mut relations = Vec::new();
        for povm in povms {
            let mut indices = Vec::with_capacity(povm.len());
            for e in povm.effects() {
                let idx = effects
                    .iter()
                    .position(|known| known.op().approx_eq(e.op(), TAU_DEDUP))
                    .unwrap_or_else(|| {
                        effects.push(e.clone());
                        effects.len() - 1
                    });
                indices.push(idx);
            }
            relations.push(Relation::Povm { indices });
        }
        Self::new(effects, relations, mode)
    }

    pub fn with_mode(mut self, mode: AssignmentMode) -> Self {
        self.mode = mode;
        self
    }

    /// Register an additional relation (validated against the operators).
    pub fn push_relation(&mut self, rel: Relation) -> Result<()> {
        if rel.indices().iter().any(|&i| i >= self.effects.len()) {
            return Err(Error::InvalidProblem(
                "relation references an effect index out of range".into(),
            ));
        }
        let residual = rel.operator_residual(&self.effects);
        if residual > TAU_SUM {
            return Err(Error::InvalidProblem(format!(
                "relation fails on the operators: residual {residual:.3e}"
            )));
        }
        self.relations.push(rel);
        Ok(())
    }

    pub fn effects(&self) -> &[Effect] {
        &self.effects
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn mode(&self) -> AssignmentMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }
}

/// A value per effect index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub values: Vec<f64>,
}

/// Re-verify an assignment against every registered relation.
pub fn verify_assignment(problem: &AssignmentProblem, assignment: &Assignment, tau: f64) -> bool {
    assignment.values.len() == problem.len()
        && problem
            .relations
            .iter()
            .all(|rel| rel.residual(&assignment.values) <= tau)
}

/// Exhaustively enumerate the 0/1 assignments satisfying every relation.
/// The empty result certifies infeasibility. Candidates are visited in
/// lexicographic order of the value tuple, so output order is deterministic.
pub fn enumerate_deterministic_assignments(
    problem: &AssignmentProblem,
) -> Result<Vec<Assignment>> {
    let n = problem.len();
    if n > 24 {
        return Err(Error::TooLarge(format!(
            "{n} effects exceeds the 24-effect exhaustive bound"
        )));
    }
    let mut out = Vec::new();
    for mask in 0u32..(1u32 << n) {
        let values: Vec<f64> = (0..n)
            .map(|i| if mask >> (n - 1 - i) & 1 == 1 { 1.0 } else { 0.0 })
            .collect();
        if problem
            .relations
            .iter()
            .all(|rel| rel.residual(&values) <= TAU_SUM)
        {
            out.push(Assignment { values });
        }
    }
    Ok(out)
}

/// Merged spectrum of each effect (descending), the candidate set for
/// spectral assignments.
pub fn effect_spectra(problem: &AssignmentProblem) -> Result<Vec<Vec<f64>>> {
    problem
        .effects
        .iter()
        .map(|e| Ok(spectral_decompose(e.op(), TAU_DEGEN)?.eigenvalues))
        .collect()
}

/// Exhaustively enumerate assignments drawing each value from its effect's
/// merged spectrum, keeping those satisfying every relation within
/// `TAU_SUM`. The empty result certifies infeasibility.
pub fn enumerate_spectral_assignments(problem: &AssignmentProblem) -> Result<Vec<Assignment>> {
    let spectra = effect_spectra(problem)?;
    let mut space: f64 = 1.0;
    for s in &spectra {
        space *= s.len() as f64;
    }
    if space > 1e6 {
        return Err(Error::TooLarge(format!(
            "spectral product space of {space:.3e} candidates exceeds 1e6"
        )));
    }
    let n = problem.len();
    let mut out = Vec::new();
    let mut odometer = vec![0usize; n];
    loop {
        let values: Vec<f64> = odometer
            .iter()
            .enumerate()
            .map(|(i, &c)| spectra[i][c])
            .collect();
        if problem
            .relations
            .iter()
            .all(|rel| rel.residual(&values) <= TAU_SUM)
        {
            out.push(Assignment { values });
        }
        // Advance (last index fastest); empty problems have one candidate.
        let mut pos = n;
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            odometer[pos] += 1;
            if odometer[pos] < spectra[pos].len() {
                break;
            }
            odometer[pos] = 0;
        }
    }
}

/// One violated value-assignment rule.
#[derive(Debug, Clone, Serialize)]
pub struct RuleViolation {
    pub rule: String,
    pub detail: String,
}

/// Rule-by-rule audit of an assignment.
#[derive(Debug, Clone, Serialize)]
pub struct RuleReport {
    pub violations: Vec<RuleViolation>,
}

impl RuleReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn to_report(&self, title: &str) -> Report {
        let mut r = Report::new(title);
        r.push(
            "all rules satisfied",
            self.holds(),
            format!("{} violations", self.violations.len()),
        );
        for v in &self.violations {
            r.push(v.rule.clone(), false, v.detail.clone());
        }
        r
    }
}

/// Audit a 0/1 valuation of projectors: 0/1 values, additivity over
/// registered sum relations, value 1 on the identity, and weight 1 across
/// every registered resolution of the identity.
pub fn check_ks_rules(assignment: &Assignment, problem: &AssignmentProblem) -> Result<RuleReport> {
    for (i, e) in problem.effects().iter().enumerate() {
        if !is_projector(e.op(), TAU_SUM) {
            return Err(Error::NotProjective { index: i });
        }
    }
    let v = &assignment.values;
    let mut violations = Vec::new();
    for (i, &x) in v.iter().enumerate() {
        if x.abs() > TAU_SUM && (x - 1.0).abs() > TAU_SUM {
            violations.push(RuleViolation {
                rule: "KS1".into(),
                detail: format!("v({i}) = {x} is not 0 or 1"),
            });
        }
    }
    for (ri, rel) in problem.relations().iter().enumerate() {
        let residual = rel.residual(v);
        if residual <= TAU_SUM {
            continue;
        }
        match rel {
            Relation::Povm { .. } => violations.push(RuleViolation {
                rule: "KS2+KS3".into(),
                detail: format!(
                    "relation {ri}: values across the resolution of identity sum off by {residual:.3e}"
                ),
            }),
            _ => violations.push(RuleViolation {
                rule: "KS2".into(),
                detail: format!("relation {ri}: additivity fails by {residual:.3e}"),
            }),
        }
    }
    for (i, e) in problem.effects().iter().enumerate() {
        if e.op().approx_eq(&HermitianOperator::identity(e.dim()), TAU_DEDUP)
            && (v[i] - 1.0).abs() > TAU_SUM
        {
            violations.push(RuleViolation {
                rule: "KS3".into(),
                detail: format!("identity effect {i} has value {}", v[i]),
            });
        }
    }
    Ok(RuleReport { violations })
}

/// Audit a probability assignment over effects: values in [0, 1] (NC1),
/// additivity on registered sums (NC2), homogeneity on registered scalar
/// pairs (NC3), unit value on the identity (NC4), and 0/1 values exactly on
/// projectors (NC5).
pub fn check_nc_rules(assignment: &Assignment, problem: &AssignmentProblem) -> RuleReport {
    let v = &assignment.values;
    let mut violations = Vec::new();
    for (i, &x) in v.iter().enumerate() {
        if !(-TAU_SUM..=1.0 + TAU_SUM).contains(&x) {
            violations.push(RuleViolation {
                rule: "NC1".into(),
                detail: format!("w({i}) = {x} outside [0, 1]"),
            });
        }
    }
    for (ri, rel) in problem.relations().iter().enumerate() {
        let residual = rel.residual(v);
        if residual <= TAU_SUM {
            continue;
        }
        let rule = match rel {
            Relation::Povm { .. } => "NC2+NC4",
            Relation::Sum { .. } => "NC2",
            Relation::Scale { .. } => "NC3",
        };
        violations.push(RuleViolation {
            rule: rule.into(),
            detail: format!("relation {ri} off by {residual:.3e}"),
        });
    }
    for (i, e) in problem.effects().iter().enumerate() {
        let projector = is_projector(e.op(), TAU_SUM);
        if e.op().approx_eq(&HermitianOperator::identity(e.dim()), TAU_DEDUP)
            && (v[i] - 1.0).abs() > TAU_SUM
        {
            violations.push(RuleViolation {
                rule: "NC4".into(),
                detail: format!("identity effect {i} has value {}", v[i]),
            });
        }
        let extremal = v[i].abs() <= TAU_SUM || (v[i] - 1.0).abs() <= TAU_SUM;
        if projector && !extremal {
            violations.push(RuleViolation {
                rule: "NC5".into(),
                detail: format!("projector {i} has non-extremal value {}", v[i]),
            });
        }
        if !projector && extremal {
            violations.push(RuleViolation {
                rule: "NC5".into(),
                detail: format!("non-projector {i} has extremal value {}", v[i]),
            });
        }
    }
    RuleReport { violations }
}

/// Outcome of the density-operator feasibility solve.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GleasonCertificate {
    /// A density operator reproduces the assignment through the trace rule.
    Feasible {
        rho: DensityOperator,
        min_eigenvalue: f64,
    },
    /// No Hermitian operator reproduces the assignment: best least-squares
    /// residual.
    LinearInfeasible { residual: f64 },
    /// The least-squares Hermitian solution reproduces the assignment but is
    /// not positive semidefinite.
    NotPositive {
        min_eigenvalue: f64,
        solution: HermitianOperator,
    },
}

impl GleasonCertificate {
    pub fn is_feasible(&self) -> bool {
        matches!(self, GleasonCertificate::Feasible { .. })
    }
}

/// Orthonormal basis of the real vector space of d x d Hermitian matrices:
/// diagonal units, and (|i><j| + |j><i|)/sqrt(2), (i|i><j| - i|j><i|)/sqrt(2).
fn hermitian_basis(d: usize) -> Vec<HermitianOperator> {
    let mut basis = Vec::with_capacity(d * d);
    for i in 0..d {
        let mut m = ComplexMatrix::zeros(d);
        m.set(i, i, Complex64::new(1.0, 0.0));
        basis.push(HermitianOperator::trusted(m));
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..d {
        for j in (i + 1)..d {
            let mut re = ComplexMatrix::zeros(d);
            re.set(i, j, Complex64::new(s, 0.0));
            re.set(j, i, Complex64::new(s, 0.0));
            basis.push(HermitianOperator::trusted(re));
            let mut im = ComplexMatrix::zeros(d);
            im.set(i, j, Complex64::new(0.0, s));
            im.set(j, i, Complex64::new(0.0, -s));
            basis.push(HermitianOperator::trusted(im));
        }
    }
    basis
}

/// Solve tr(rho E_i) = w_i with tr(rho) = 1 over Hermitian matrices by least
/// squares; on a small residual, check positivity of the solution.
pub fn gleason_feasibility(
    effects: &[Effect],
    assignment: &Assignment,
    tau: f64,
) -> Result<GleasonCertificate> {
    if effects.is_empty() {
        return Err(Error::InvalidProblem("no effects to fit".into()));
    }
    if effects.len() != assignment.values.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} values for {} effects",
            assignment.values.len(),
            effects.len()
        )));
    }
    let d = effects[0].dim();
    if effects.iter().any(|e| e.dim() != d) {
        return Err(Error::DimensionMismatch(
            "effects must share one dimension".into(),
        ));
    }
    let basis = hermitian_basis(d);
    let rows = effects.len() + 1;
    let cols = basis.len();
    let mut a = DMatrix::<f64>::zeros(rows, cols);
    let mut b = DVector::<f64>::zeros(rows);
    for (r, e) in effects.iter().enumerate() {
        for (c, base) in basis.iter().enumerate() {
            a[(r, c)] = crate::operator::hs_inner(e.op(), base)?;
        }
        b[r] = assignment.values[r];
    }
    for (c, base) in basis.iter().enumerate() {
        a[(rows - 1, c)] = base.matrix().trace().re;
    }
    b[rows - 1] = 1.0;

    let svd = a.clone().svd(true, true);
    let x = svd
        .solve(&b, 1e-12)
        .map_err(|e| Error::NumericalFailure(e.to_string()))?;
    let residual = (&a * &x - &b).amax();
    if residual > tau {
        return Ok(GleasonCertificate::LinearInfeasible { residual });
    }

    let mut solution = HermitianOperator::zeros(d);
    for (c, base) in basis.iter().enumerate() {
        solution = solution.add(&base.scale(x[c]));
    }
    let min_eigenvalue = solution.min_eigenvalue();
    if min_eigenvalue < -tau.max(TAU_EIG) {
        return Ok(GleasonCertificate::NotPositive {
            min_eigenvalue,
            solution,
        });
    }
    let rho = DensityOperator::with_tolerance(solution, tau.max(TAU_EIG), tau.max(TAU_SUM))?;
    Ok(GleasonCertificate::Feasible {
        rho,
        min_eigenvalue,
    })
}

/// Evaluate w(E) = sum_i s_i v(P_i) for a 0/1 selection of exactly one
/// eigenspace of E; the result is the selected merged eigenvalue.
pub fn response_from_projector_valuation(e: &Effect, selection: &[bool]) -> Result<f64> {
    let res = spectral_decompose(e.op(), TAU_DEGEN)?;
    if selection.len() != res.eigenvalues.len() {
        return Err(Error::InvalidValuation(format!(
            "{} selections for {} eigenspaces",
            selection.len(),
            res.eigenvalues.len()
        )));
    }
    let ones = selection.iter().filter(|&&s| s).count();
    if ones != 1 {
        return Err(Error::InvalidValuation(format!(
            "exactly one eigenspace must be selected, got {ones}"
        )));
    }
    let chosen = selection.iter().position(|&s| s).unwrap();
    Ok(res.eigenvalues[chosen])
}

/// Restrict a problem to effects with minimum eigenvalue above 1/2 (such an
/// effect cannot appear twice in any POVM). Relations survive only when all
/// of their effects survive.
pub fn filter_effects_above_half(problem: &AssignmentProblem) -> AssignmentProblem {
    let keep: Vec<bool> = problem
        .effects
        .iter()
        .map(|e| e.op().min_eigenvalue() > 0.5 + TAU_EIG)
        .collect();
    let mut remap = vec![usize::MAX; problem.len()];
    let mut effects = Vec::new();
    for (i, e) in problem.effects.iter().enumerate() {
        if keep[i] {
            remap[i] = effects.len();
            effects.push(e.clone());
        }
    }
    let relations = problem
        .relations
        .iter()
        .filter(|rel| rel.indices().iter().all(|&i| keep[i]))
        .map(|rel| match rel {
            Relation::Povm { indices } => Relation::Povm {
                indices: indices.iter().map(|&i| remap[i]).collect(),
            },
            Relation::Sum {
                target,
                sources,
                coeffs,
            } => Relation::Sum {
                target: remap[*target],
                sources: sources.iter().map(|&i| remap[i]).collect(),
                coeffs: coeffs.clone(),
            },
            Relation::Scale {
                target,
                source,
                factor,
            } => Relation::Scale {
                target: remap[*target],
                source: remap[*source],
                factor: *factor,
            },
        })
        .collect();
    AssignmentProblem {
        effects,
        relations,
        mode: problem.mode,
    }
}

/// A 0/1 valuation in the split-variable regime: one value per occurrence of
/// an effect inside each relation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitAssignment {
    /// values[r][pos] is the value of occurrence `pos` inside relation `r`.
    pub per_relation: Vec<Vec<f64>>,
}

/// Enumerate 0/1 valuations under the weakened identification that repeated
/// occurrences of an effect *within* one POVM carry independent variables,
/// while occurrences of the same effect in *different* POVMs remain tied.
///
/// This weakening is not a fully formalized notion of noncontextuality; it
/// exists to examine proposals that forbid context-dependence only between,
/// not within, measurements. Only POVM membership relations are supported.
pub fn enumerate_split_deterministic(problem: &AssignmentProblem) -> Result<Vec<SplitAssignment>> {
    let mut occurrences: Vec<(usize, usize, usize)> = Vec::new(); // (relation, pos, effect)
    for (ri, rel) in problem.relations.iter().enumerate() {
        match rel {
            Relation::Povm { indices } => {
                for (pos, &e) in indices.iter().enumerate() {
                    occurrences.push((ri, pos, e));
                }
            }
            _ => {
                return Err(Error::InvalidProblem(
                    "split-variable enumeration supports POVM relations only".into(),
                ))
            }
        }
    }
    let n = occurrences.len();
    if n > 24 {
        return Err(Error::TooLarge(format!(
            "{n} occurrence variables exceeds the 24-variable exhaustive bound"
        )));
    }
    // Cross-relation ties: same effect in different relations.
    let mut ties = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            if occurrences[a].2 == occurrences[b].2 && occurrences[a].0 != occurrences[b].0 {
                ties.push((a, b));
            }
        }
    }
    let mut out = Vec::new();
    'mask: for mask in 0u32..(1u32 << n) {
        let bit = |i: usize| -> f64 {
            if mask >> (n - 1 - i) & 1 == 1 {
                1.0
            } else {
                0.0
            }
        };
        for &(a, b) in &ties {
            if bit(a) != bit(b) {
                continue 'mask;
            }
        }
        for (ri, rel) in problem.relations.iter().enumerate() {
            if let Relation::Povm { indices } = rel {
                let total: f64 = (0..indices.len())
                    .map(|pos| {
                        let var = occurrences
                            .iter()
                            .position(|&(r, p, _)| r == ri && p == pos)
                            .unwrap();
                        bit(var)
                    })
                    .sum();
                if (total - 1.0).abs() > TAU_SUM {
                    continue 'mask;
                }
            }
        }
        let per_relation = problem
            .relations
            .iter()
            .enumerate()
            .map(|(ri, rel)| {
                let Relation::Povm { indices } = rel else {
                    unreachable!()
                };
                (0..indices.len())
                    .map(|pos| {
                        let var = occurrences
                            .iter()
                            .position(|&(r, p, _)| r == ri && p == pos)
                            .unwrap();
                        bit(var)
                    })
                    .collect()
            })
            .collect();
        out.push(SplitAssignment { per_relation });
    }
    Ok(out)
}

// --- JSON schema ---

#[derive(Serialize, Deserialize)]
struct RelationJson {
    kind: String,
    indices: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    coeffs: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ProblemJson {
    effects: Vec<Effect>,
    relations: Vec<RelationJson>,
    #[serde(default = "default_mode")]
    mode: AssignmentMode,
}

fn default_mode() -> AssignmentMode {
    AssignmentMode::Deterministic
}

impl Serialize for AssignmentProblem {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        let relations = self
            .relations
            .iter()
            .map(|rel| match rel {
                Relation::Povm { indices } => RelationJson {
                    kind: "povm".into(),
                    indices: indices.clone(),
                    coeffs: Vec::new(),
                },
                Relation::Sum {
                    target,
                    sources,
                    coeffs,
                } => RelationJson {
                    kind: "sum".into(),
                    indices: std::iter::once(*target).chain(sources.iter().copied()).collect(),
                    coeffs: coeffs.clone(),
                },
                Relation::Scale {
                    target,
                    source,
                    factor,
                } => RelationJson {
                    kind: "scale".into(),
                    indices: vec![*target, *source],
                    coeffs: vec![*factor],
                },
            })
            .collect();
        ProblemJson {
            effects: self.effects.clone(),
            relations,
            mode: self.mode,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for AssignmentProblem {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = ProblemJson::deserialize(deserializer)?;
        let relations = raw
            .relations
            .into_iter()
            .enumerate()
            .map(|(ri, r)| match r.kind.as_str() {
                "povm" => Ok(Relation::Povm { indices: r.indices }),
                "sum" => {
                    if r.indices.is_empty() || r.coeffs.len() != r.indices.len() - 1 {
                        return Err(D::Error::custom(format!(
                            "relation {ri}: sum needs a target index plus one coefficient per source"
                        )));
                    }
                    Ok(Relation::Sum {
                        target: r.indices[0],
                        sources: r.indices[1..].to_vec(),
                        coeffs: r.coeffs,
                    })
                }
                "scale" => {
                    if r.indices.len() != 2 || r.coeffs.len() != 1 {
                        return Err(D::Error::custom(format!(
                            "relation {ri}: scale needs two indices and one coefficient"
                        )));
                    }
                    Ok(Relation::Scale {
                        target: r.indices[0],
                        source: r.indices[1],
                        factor: r.coeffs[0],
                    })
                }
                other => Err(D::Error::custom(format!(
                    "relation {ri}: unknown kind '{other}'"
                ))),
            })
            .collect::<std::result::Result<Vec<_>, D::Error>>()?;
        AssignmentProblem::new(raw.effects, relations, raw.mode).map_err(D::Error::custom)
    }
}

/// Canonical example problems used by the demos, fixtures, and tests.
pub mod problems {
    use super::*;
    use crate::measurement::coarse_grain;
    use crate::operator::{bloch_projector, trine_projectors};

    fn scalar_effect(dim: usize, s: f64) -> Effect {
        Effect::new(HermitianOperator::identity(dim).scale(s)).expect("scalar effect in [0,1]")
    }

    /// The fair-coin POVM {I/2, I/2}: one effect, one relation listing it
    /// twice.
    pub fn fair_coin() -> AssignmentProblem {
        let half = scalar_effect(2, 0.5);
        let coin = Povm::new(vec![half.clone(), half]).expect("fair coin resolves identity");
        AssignmentProblem::from_povms(&[coin], AssignmentMode::Deterministic)
            .expect("valid problem")
    }

    /// Three four-outcome POVMs built from halved projector pairs; every
    /// effect appears in exactly two POVMs, which forces an even number of
    /// ones while the three memberships demand an odd number.
    pub fn cabello_nakamura() -> AssignmentProblem {
        let e = bloch_projector(0.0, 0.0, 1.0);
        let f = bloch_projector(1.0, 0.0, 0.0);
        let g = bloch_projector(0.0, 1.0, 0.0);
        let halves = |p: &HermitianOperator| {
            let id = HermitianOperator::identity(2);
            (
                Effect::new(p.scale(0.5)).unwrap(),
                Effect::new(id.sub(p).scale(0.5)).unwrap(),
            )
        };
        let (e1, e2) = halves(&e);
        let (f1, f2) = halves(&f);
        let (g1, g2) = halves(&g);
        let povms = [
            Povm::new(vec![e1.clone(), e2.clone(), f1.clone(), f2.clone()]).unwrap(),
            Povm::new(vec![e1, e2, g1.clone(), g2.clone()]).unwrap(),
            Povm::new(vec![f1, f2, g1, g2]).unwrap(),
        ];
        AssignmentProblem::from_povms(&povms, AssignmentMode::Deterministic).expect("valid problem")
    }

    /// Four scalar effects whose two coarse-grainings share the effect I/2,
    /// so a 0/1 valuation must give I/2 two different values.
    pub fn coarse_grain_paradox(p: f64, q: f64) -> Result<AssignmentProblem> {
        for v in [p, q] {
            if !(0.0..=1.0).contains(&v) || v == 0.0 || v == 1.0 || v == 0.5 {
                return Err(Error::InvalidProblem(format!(
                    "parameters must lie strictly inside (0, 1) and differ from 1/2, got {v}"
                )));
            }
        }
        if p == q {
            return Err(Error::InvalidProblem("parameters must differ".into()));
        }
        let povm = Povm::new(vec![
            scalar_effect(2, p / 2.0),
            scalar_effect(2, (1.0 - p) / 2.0),
            scalar_effect(2, q / 2.0),
            scalar_effect(2, (1.0 - q) / 2.0),
        ])?;
        let first_pair = coarse_grain(
            &povm,
            &[
                vec!["0".into(), "1".into()],
                vec!["2".into()],
                vec!["3".into()],
            ],
        )?;
        let last_pair = coarse_grain(
            &povm,
            &[
                vec!["0".into()],
                vec!["1".into()],
                vec!["2".into(), "3".into()],
            ],
        )?;
        AssignmentProblem::from_povms(&[povm, first_pair, last_pair], AssignmentMode::Deterministic)
    }

    /// The trine POVM {(2/3)P_1, (2/3)P_2, (2/3)P_3}: each spectrum is
    /// {0, 2/3}, and no selection sums to 1.
    pub fn trine() -> AssignmentProblem {
        let effects = trine_projectors()
            .iter()
            .map(|p| Effect::new(p.scale(2.0 / 3.0)).unwrap())
            .collect::<Vec<_>>();
        let povm = Povm::new(effects).expect("trine resolves identity");
        AssignmentProblem::from_povms(&[povm], AssignmentMode::Spectral).expect("valid problem")
    }

    /// The fair-coin POVM next to {I/2, (p/2)I, ((1-p)/2)I}: the shared
    /// effect I/2 ties the coin's two occurrences back together even when
    /// within-POVM repetitions carry independent variables.
    pub fn same_effect_twice(p: f64) -> Result<AssignmentProblem> {
        if !(0.0 < p && p < 1.0) {
            return Err(Error::InvalidProblem(format!(
                "parameter must lie strictly inside (0, 1), got {p}"
            )));
        }
        let half = scalar_effect(2, 0.5);
        let coin = Povm::new(vec![half.clone(), half.clone()])?;
        let three = Povm::new(vec![
            half,
            scalar_effect(2, p / 2.0),
            scalar_effect(2, (1.0 - p) / 2.0),
        ])?;
        AssignmentProblem::from_povms(&[coin, three], AssignmentMode::Deterministic)
    }

    /// The six rank-1 projectors of the qubit X, Y, Z bases with their three
    /// basis relations.
    pub fn xyz_projectors() -> AssignmentProblem {
        let axes = [
            (1.0, 0.0, 0.0),
            (0.0, 1.0, 0.0),
            (0.0, 0.0, 1.0),
        ];
        let povms: Vec<Povm> = axes
            .iter()
            .map(|&(x, y, z)| {
                Povm::new(vec![
                    Effect::new(bloch_projector(x, y, z)).unwrap(),
                    Effect::new(bloch_projector(-x, -y, -z)).unwrap(),
                ])
                .unwrap()
            })
            .collect();
        AssignmentProblem::from_povms(&povms, AssignmentMode::Deterministic)
            .expect("valid problem")
    }
}
