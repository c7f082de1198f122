//! Finite ontological models and the generalized-noncontextuality checks.
//!
//! A model is a triple (Lambda, mu, xi): a finite ontic space, epistemic
//! states mu(lambda|P), and response functions xi(k|lambda,M). The checks
//! here cover empirical adequacy, outcome determinism, measurement and
//! preparation noncontextuality, the determinism-iff-sharp pattern, and the
//! outcome-deterministic extension onto an auxiliary [0,1] ancilla.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::measurement::OperationalTheory;
use crate::operator::{DensityOperator, Effect, HermitianOperator};
use crate::report::Report;
use crate::tol::TAU_SUM;
use crate::Result;

/// Finite ontological model over a labelled ontic space.
#[derive(Debug, Clone)]
pub struct OntologicalModel {
    ontic_states: Vec<String>,
    epistemic: BTreeMap<String, Vec<f64>>,
    responses: BTreeMap<String, Vec<Vec<f64>>>,
}

impl OntologicalModel {
    pub fn new(ontic_states: Vec<String>) -> Self {
        Self {
            ontic_states,
            epistemic: BTreeMap::new(),
            responses: BTreeMap::new(),
        }
    }

    pub fn ontic_states(&self) -> &[String] {
        &self.ontic_states
    }

    /// Register mu(.|P); must be a distribution over the ontic space.
    pub fn insert_epistemic(&mut self, label: impl Into<String>, mu: Vec<f64>) -> Result<()> {
        let label = label.into();
        if mu.len() != self.ontic_states.len() {
            return Err(Error::InvalidModel(format!(
                "epistemic state for '{label}' has {} entries over {} ontic states",
                mu.len(),
                self.ontic_states.len()
            )));
        }
        if let Some(v) = mu.iter().find(|v| **v < -TAU_SUM || **v > 1.0 + TAU_SUM) {
            return Err(Error::InvalidModel(format!(
                "epistemic state for '{label}' has weight {v} outside [0, 1]"
            )));
        }
        let total: f64 = mu.iter().sum();
        if (total - 1.0).abs() > TAU_SUM {
            return Err(Error::InvalidModel(format!(
                "epistemic state for '{label}' sums to {total}, expected 1"
            )));
        }
        self.epistemic.insert(label, mu);
        Ok(())
    }

    /// Register the response functions of a measurement as rows per outcome,
    /// columns per ontic state.
    pub fn insert_responses(
        &mut self,
        label: impl Into<String>,
        rows: Vec<Vec<f64>>,
    ) -> Result<()> {
        let label = label.into();
        if rows.is_empty() {
            return Err(Error::InvalidModel(format!(
                "measurement '{label}' has no outcomes"
            )));
        }
        for (k, row) in rows.iter().enumerate() {
            if row.len() != self.ontic_states.len() {
                return Err(Error::InvalidModel(format!(
                    "response {k} of '{label}' has {} entries over {} ontic states",
                    row.len(),
                    self.ontic_states.len()
                )));
            }
            for (l, &v) in row.iter().enumerate() {
                if !(-TAU_SUM..=1.0 + TAU_SUM).contains(&v) {
                    return Err(Error::InvalidModel(format!(
                        "xi({k}|{},{label}) = {v} outside [0, 1]",
                        self.ontic_states[l]
                    )));
                }
            }
        }
        for l in 0..self.ontic_states.len() {
            let total: f64 = rows.iter().map(|r| r[l]).sum();
            if (total - 1.0).abs() > TAU_SUM {
                return Err(Error::InvalidModel(format!(
                    "responses of '{label}' at ontic state '{}' sum to {total}, expected 1",
                    self.ontic_states[l]
                )));
            }
        }
        self.responses.insert(label, rows);
        Ok(())
    }

    pub fn epistemic(&self, label: &str) -> Option<&[f64]> {
        self.epistemic.get(label).map(|v| v.as_slice())
    }

    pub fn responses(&self, label: &str) -> Option<&Vec<Vec<f64>>> {
        self.responses.get(label)
    }

    fn require_mu(&self, label: &str) -> Result<&[f64]> {
        self.epistemic(label)
            .ok_or_else(|| Error::LabelMismatch(format!("no epistemic state for '{label}'")))
    }

    fn require_xi(&self, label: &str) -> Result<&Vec<Vec<f64>>> {
        self.responses(label)
            .ok_or_else(|| Error::LabelMismatch(format!("no response functions for '{label}'")))
    }

    /// Model prediction sum_lambda mu(lambda|P) xi(k|lambda,M).
    pub fn prediction(&self, p_label: &str, m_label: &str, k: usize) -> Result<f64> {
        let mu = self.require_mu(p_label)?;
        let xi = self.require_xi(m_label)?;
        if k >= xi.len() {
            return Err(Error::LabelMismatch(format!(
                "measurement '{m_label}' has no outcome {k}"
            )));
        }
        let mut acc = 0.0;
        for l in 0..mu.len() {
            acc += mu[l] * xi[k][l];
        }
        Ok(acc)
    }
}

/// One adequacy failure: the model prediction strays from the table.
#[derive(Debug, Clone, Serialize)]
pub struct AdequacyViolation {
    pub preparation: String,
    pub measurement: String,
    pub outcome: usize,
    pub predicted: f64,
    pub expected: f64,
}

/// Outcome of an empirical-adequacy sweep over all (P, M, k).
#[derive(Debug, Clone, Serialize)]
pub struct AdequacyReport {
    pub checked: usize,
    pub max_residual: f64,
    pub tau: f64,
    pub violations: Vec<AdequacyViolation>,
}

impl AdequacyReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn to_report(&self) -> Report {
        let mut r = Report::new("empirical adequacy");
        r.push(
            "model reproduces the probability table",
            self.holds(),
            format!(
                "{} entries checked, max residual {:.3e}, {} violations",
                self.checked,
                self.max_residual,
                self.violations.len()
            ),
        );
        for v in self.violations.iter().take(10) {
            r.push(
                format!("entry ({}, {}, outcome {})", v.preparation, v.measurement, v.outcome),
                false,
                format!("predicted {} expected {}", v.predicted, v.expected),
            );
        }
        r
    }
}

/// Check sum_lambda mu(lambda|P) xi(k|lambda,M) = p(k|M,P) for every entry.
pub fn empirical_adequacy(
    model: &OntologicalModel,
    theory: &OperationalTheory,
    tau: f64,
) -> Result<AdequacyReport> {
    let mut violations = Vec::new();
    let mut checked = 0;
    let mut max_residual = 0.0f64;
    for (mi, m) in theory.measurements().iter().enumerate() {
        let xi = model.require_xi(&m.label)?;
        if xi.len() != m.povm.len() {
            return Err(Error::LabelMismatch(format!(
                "measurement '{}' has {} outcomes in the theory but {} response functions",
                m.label,
                m.povm.len(),
                xi.len()
            )));
        }
        for (pi, p) in theory.preparations().iter().enumerate() {
            model.require_mu(&p.label)?;
            for k in 0..m.povm.len() {
                let predicted = model.prediction(&p.label, &m.label, k)?;
                let expected = theory.prob(mi, pi, k);
                let residual = (predicted - expected).abs();
                max_residual = max_residual.max(residual);
                checked += 1;
                if residual > tau {
                    violations.push(AdequacyViolation {
                        preparation: p.label.clone(),
                        measurement: m.label.clone(),
                        outcome: k,
                        predicted,
                        expected,
                    });
                }
            }
        }
    }
    Ok(AdequacyReport {
        checked,
        max_residual,
        tau,
        violations,
    })
}

/// True iff every response value of the measurement lies within `tau` of 0 or 1.
pub fn is_outcome_deterministic(
    model: &OntologicalModel,
    m_label: &str,
    tau: f64,
) -> Result<bool> {
    let xi = model.require_xi(m_label)?;
    Ok(xi
        .iter()
        .flatten()
        .all(|&v| v.abs() <= tau || (v - 1.0).abs() <= tau))
}

/// A response-function disagreement between operationally equivalent
/// measurements.
#[derive(Debug, Clone, Serialize)]
pub struct ResponseViolation {
    pub first: String,
    pub second: String,
    pub outcome: usize,
    pub ontic_state: String,
    pub first_value: f64,
    pub second_value: f64,
}

/// Result of the measurement-noncontextuality check.
#[derive(Debug, Clone, Serialize)]
pub struct MeasurementNcReport {
    /// Operational-equivalence classes (by measurement label).
    pub classes: Vec<Vec<String>>,
    pub violations: Vec<ResponseViolation>,
}

impl MeasurementNcReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn to_report(&self) -> Report {
        let mut r = Report::new("measurement noncontextuality");
        let nontrivial = self.classes.iter().filter(|c| c.len() > 1).count();
        r.push(
            "equivalent measurements share response functions",
            self.holds(),
            format!(
                "{} equivalence classes ({nontrivial} nontrivial), {} violations",
                self.classes.len(),
                self.violations.len()
            ),
        );
        for v in self.violations.iter().take(10) {
            r.push(
                format!("pair ({}, {})", v.first, v.second),
                false,
                format!(
                    "xi({}|{}) = {} vs {}",
                    v.outcome, v.ontic_state, v.first_value, v.second_value
                ),
            );
        }
        r.note(
            "operational equivalence is judged relative to the preparations listed in the theory",
        );
        r
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let root = self.find(self.parent[x]);
            self.parent[x] = root;
        }
        self.parent[x]
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }

    fn classes(&mut self, n: usize) -> Vec<Vec<usize>> {
        let mut map: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for i in 0..n {
            let root = self.find(i);
            map.entry(root).or_default().push(i);
        }
        map.into_values().collect()
    }
}

/// How outcomes are matched when deciding operational equivalence of two
/// measurements. The default compares outcome k with outcome k; the
/// permutation variant additionally tries relabellings of one side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutcomeAlignment {
    #[default]
    Identity,
    Permutation,
}

/// Partition measurements into operational-equivalence classes (table rows
/// agreeing within `tau_stats` under the identity outcome labelling) and
/// verify that response functions agree within `tau_xi` inside each class.
pub fn check_measurement_noncontextual(
    model: &OntologicalModel,
    theory: &OperationalTheory,
    tau_stats: f64,
    tau_xi: f64,
) -> Result<MeasurementNcReport> {
    check_measurement_noncontextual_aligned(
        model,
        theory,
        tau_stats,
        tau_xi,
        OutcomeAlignment::Identity,
    )
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 1 {
        return vec![vec![0]];
    }
    let mut out = Vec::new();
    for rest in permutations(n - 1) {
        for slot in 0..n {
            let mut perm = Vec::with_capacity(n);
            perm.extend(rest[..slot].iter().copied());
            perm.push(n - 1);
            perm.extend(rest[slot..].iter().copied());
            out.push(perm);
        }
    }
    out
}

/// As `check_measurement_noncontextual`, with a choice of outcome alignment.
/// Under `Permutation`, two measurements fall in one class when some outcome
/// relabelling makes their statistics coincide, and their responses are then
/// compared under the first such relabelling.
pub fn check_measurement_noncontextual_aligned(
    model: &OntologicalModel,
    theory: &OperationalTheory,
    tau_stats: f64,
    tau_xi: f64,
    alignment: OutcomeAlignment,
) -> Result<MeasurementNcReport> {
    let n = theory.measurements().len();
    let n_prep = theory.preparations().len();

    // perm such that row_a(k) == row_b(perm[k]) for all preparations, if any.
    let matching_perm = |a: usize, b: usize| -> Option<Vec<usize>> {
        let (ma, mb) = (&theory.measurements()[a], &theory.measurements()[b]);
        if ma.povm.len() != mb.povm.len() {
            return None;
        }
        let outcomes = ma.povm.len();
        let agrees = |perm: &[usize]| {
            (0..n_prep).all(|p| {
                (0..outcomes).all(|k| {
                    (theory.prob(a, p, k) - theory.prob(b, p, perm[k])).abs() <= tau_stats
                })
            })
        };
        let identity: Vec<usize> = (0..outcomes).collect();
        if agrees(&identity) {
            return Some(identity);
        }
        if alignment == OutcomeAlignment::Permutation {
            for perm in permutations(outcomes) {
                if agrees(&perm) {
                    return Some(perm);
                }
            }
        }
        None
    };

    let mut uf = UnionFind::new(n);
    for a in 0..n {
        for b in (a + 1)..n {
            if matching_perm(a, b).is_some() {
                uf.union(a, b);
            }
        }
    }
    let classes_idx = uf.classes(n);
    let mut violations = Vec::new();
    for class in &classes_idx {
        for (pos, &a) in class.iter().enumerate() {
            for &b in &class[pos + 1..] {
                let la = &theory.measurements()[a].label;
                let lb = &theory.measurements()[b].label;
                let xa = model.require_xi(la)?;
                let xb = model.require_xi(lb)?;
                // Equivalence is transitive inside a class, but the aligning
                // permutation is pairwise.
                let Some(perm) = matching_perm(a, b) else {
                    continue;
                };
                for k in 0..xa.len() {
                    for l in 0..model.ontic_states().len() {
                        if (xa[k][l] - xb[perm[k]][l]).abs() > tau_xi {
                            violations.push(ResponseViolation {
                                first: la.clone(),
                                second: lb.clone(),
                                outcome: k,
                                ontic_state: model.ontic_states()[l].clone(),
                                first_value: xa[k][l],
                                second_value: xb[perm[k]][l],
                            });
                        }
                    }
                }
            }
        }
    }
    let classes = classes_idx
        .into_iter()
        .map(|c| {
            c.into_iter()
                .map(|i| theory.measurements()[i].label.clone())
                .collect()
        })
        .collect();
    Ok(MeasurementNcReport { classes, violations })
}

/// An epistemic-state disagreement between operationally equivalent
/// preparations.
#[derive(Debug, Clone, Serialize)]
pub struct EpistemicViolation {
    pub first: String,
    pub second: String,
    pub ontic_state: String,
    pub first_value: f64,
    pub second_value: f64,
}

/// Result of the preparation-noncontextuality check.
#[derive(Debug, Clone, Serialize)]
pub struct PreparationNcReport {
    pub classes: Vec<Vec<String>>,
    pub violations: Vec<EpistemicViolation>,
}

impl PreparationNcReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn to_report(&self) -> Report {
        let mut r = Report::new("preparation noncontextuality");
        let nontrivial = self.classes.iter().filter(|c| c.len() > 1).count();
        r.push(
            "equivalent preparations share epistemic states",
            self.holds(),
            format!(
                "{} equivalence classes ({nontrivial} nontrivial), {} violations",
                self.classes.len(),
                self.violations.len()
            ),
        );
        for v in self.violations.iter().take(10) {
            r.push(
                format!("pair ({}, {})", v.first, v.second),
                false,
                format!(
                    "mu({}) = {} vs {}",
                    v.ontic_state, v.first_value, v.second_value
                ),
            );
        }
        r.note(
            "operational equivalence is judged relative to the measurements listed in the theory",
        );
        r
    }
}

/// Group preparations whose statistics agree within `tau_stats` across every
/// listed measurement, and verify the epistemic states agree within `tau_mu`
/// inside each group.
pub fn check_preparation_noncontextual(
    model: &OntologicalModel,
    theory: &OperationalTheory,
    tau_stats: f64,
    tau_mu: f64,
) -> Result<PreparationNcReport> {
    let n = theory.preparations().len();
    let stats: Vec<Vec<f64>> = (0..n).map(|p| theory.preparation_statistics(p)).collect();
    let mut uf = UnionFind::new(n);
    for a in 0..n {
        for b in (a + 1)..n {
            let agree = stats[a]
                .iter()
                .zip(&stats[b])
                .all(|(x, y)| (x - y).abs() <= tau_stats);
            if agree {
                uf.union(a, b);
            }
        }
    }
    let classes_idx = uf.classes(n);
    let mut violations = Vec::new();
    for class in &classes_idx {
        for (pos, &a) in class.iter().enumerate() {
            for &b in &class[pos + 1..] {
                let la = &theory.preparations()[a].label;
                let lb = &theory.preparations()[b].label;
                let mua = model.require_mu(la)?;
                let mub = model.require_mu(lb)?;
                for l in 0..model.ontic_states().len() {
                    if (mua[l] - mub[l]).abs() > tau_mu {
                        violations.push(EpistemicViolation {
                            first: la.clone(),
                            second: lb.clone(),
                            ontic_state: model.ontic_states()[l].clone(),
                            first_value: mua[l],
                            second_value: mub[l],
                        });
                    }
                }
            }
        }
    }
    let classes = classes_idx
        .into_iter()
        .map(|c| {
            c.into_iter()
                .map(|i| theory.preparations()[i].label.clone())
                .collect()
        })
        .collect();
    Ok(PreparationNcReport { classes, violations })
}

/// One outcome's region of the auxiliary interval: the indicator of
/// [lo, hi) (closed at 1 when hi reaches the top) with its exact measure.
///
/// The measure is carried explicitly: it is the base response value by
/// construction, so marginals reproduce the base model without the rounding
/// a difference of cut points could introduce.
#[derive(Debug, Clone, Serialize)]
pub struct OutcomeInterval {
    pub lo: f64,
    pub hi: f64,
    pub measure: f64,
}

impl OutcomeInterval {
    /// Indicator value at ancilla point `lambda_a`.
    pub fn indicator(&self, lambda_a: f64) -> f64 {
        let inside = if self.hi >= 1.0 {
            lambda_a >= self.lo && lambda_a <= self.hi
        } else {
            lambda_a >= self.lo && lambda_a < self.hi
        };
        if inside {
            1.0
        } else {
            0.0
        }
    }

    /// Measure of the set where this indicator and another disagree.
    pub fn disagreement(&self, other: &Self) -> f64 {
        let overlap = (self.hi.min(other.hi) - self.lo.max(other.lo)).max(0.0);
        (self.hi - self.lo) + (other.hi - other.lo) - 2.0 * overlap
    }
}

/// Interval partition of [0,1] carried by one ontic state of the base model.
#[derive(Debug, Clone, Serialize)]
pub struct IntervalResponse {
    pub intervals: Vec<OutcomeInterval>,
}

/// Outcome-deterministic extension of one measurement onto the enlarged
/// ontic space Lambda_s x [0,1] with the ancilla uniformly distributed. The
/// epistemic states are inherited from the base model times the uniform
/// density, so the base model's labels continue to apply.
#[derive(Debug, Clone, Serialize)]
pub struct ExtendedModel {
    pub measurement: String,
    pub ontic_states: Vec<String>,
    /// One interval partition per base ontic state.
    pub interval_responses: Vec<IntervalResponse>,
}

impl ExtendedModel {
    pub fn outcomes(&self) -> usize {
        self.interval_responses[0].intervals.len()
    }

    /// Extended response xi(k | lambda_s, lambda_a): always 0 or 1.
    pub fn response(&self, k: usize, lambda_s: usize, lambda_a: f64) -> f64 {
        self.interval_responses[lambda_s].intervals[k].indicator(lambda_a)
    }

    /// Closed-form marginal over the ancilla: the interval measure, which
    /// equals the base response exactly.
    pub fn marginal(&self, k: usize, lambda_s: usize) -> f64 {
        self.interval_responses[lambda_s].intervals[k].measure
    }

    /// Prediction of the extended model for an epistemic state over the base
    /// ontic space (the uniform ancilla integrates to the interval measure).
    pub fn prediction(&self, mu: &[f64], k: usize) -> f64 {
        let mut acc = 0.0;
        for l in 0..mu.len() {
            acc += mu[l] * self.marginal(k, l);
        }
        acc
    }

    /// Relabel outcomes: outcome k of the result uses the region of outcome
    /// perm[k] of self. This is how classical post-processing by a
    /// permutation acts on the extended representation.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.outcomes() {
            return Err(Error::InvalidValuation(format!(
                "permutation of length {} over {} outcomes",
                perm.len(),
                self.outcomes()
            )));
        }
        let mut check: Vec<usize> = perm.to_vec();
        check.sort_unstable();
        if check != (0..self.outcomes()).collect::<Vec<_>>() {
            return Err(Error::InvalidValuation("not a permutation".into()));
        }
        Ok(Self {
            measurement: format!("{}#perm", self.measurement),
            ontic_states: self.ontic_states.clone(),
            interval_responses: self
                .interval_responses
                .iter()
                .map(|ir| IntervalResponse {
                    intervals: perm.iter().map(|&src| ir.intervals[src].clone()).collect(),
                })
                .collect(),
        })
    }
}

/// Build the outcome-deterministic extension of measurement `m_label`: cut
/// points are the running sums of the base responses, and each outcome k
/// occupies the interval between cut k and cut k+1.
pub fn ontic_extend(model: &OntologicalModel, m_label: &str) -> Result<ExtendedModel> {
    let xi = model.require_xi(m_label)?;
    let outcomes = xi.len();
    let mut interval_responses = Vec::with_capacity(model.ontic_states().len());
    for l in 0..model.ontic_states().len() {
        let mut intervals = Vec::with_capacity(outcomes);
        let mut cut = 0.0f64;
        for row in xi.iter() {
            let lo = cut;
            cut += row[l];
            intervals.push(OutcomeInterval {
                lo,
                hi: cut,
                measure: row[l],
            });
        }
        if (cut - 1.0).abs() > TAU_SUM {
            return Err(Error::InvalidModel(format!(
                "responses of '{m_label}' at ontic state '{}' sum to {cut}",
                model.ontic_states()[l]
            )));
        }
        interval_responses.push(IntervalResponse { intervals });
    }
    Ok(ExtendedModel {
        measurement: m_label.to_string(),
        ontic_states: model.ontic_states().to_vec(),
        interval_responses,
    })
}

/// Verdicts of the bit-flip extension demonstration.
///
/// A fair-coin measurement and its outcome-permuted twin share the same
/// system-level response functions, yet their outcome-deterministic
/// extensions must differ on a full-measure set of ancilla values.
#[derive(Debug, Clone, Serialize)]
pub struct BitFlipExtensionDemo {
    pub system_responses_equal: bool,
    /// Per outcome, the ancilla measure on which the two extended responses
    /// disagree (at each base ontic state, folded to the minimum).
    pub disagreement_measure: Vec<f64>,
    pub base_adequate: bool,
    pub extensions_adequate: bool,
    pub extensions_deterministic: bool,
}

impl BitFlipExtensionDemo {
    pub fn holds(&self) -> bool {
        self.system_responses_equal
            && self.disagreement_measure.iter().all(|&m| m > 0.999)
            && self.base_adequate
            && self.extensions_adequate
            && self.extensions_deterministic
    }

    pub fn to_report(&self) -> Report {
        let mut r = Report::new("bit-flip extension");
        r.push(
            "system-level response sets equal",
            self.system_responses_equal,
            "both measurements are represented by {1/2, 1/2}",
        );
        r.push(
            "extended responses differ on a full-measure region",
            self.disagreement_measure.iter().all(|&m| m > 0.999),
            format!("disagreement measure per outcome: {:?}", self.disagreement_measure),
        );
        r.push("base model adequate", self.base_adequate, "");
        r.push(
            "both extensions adequate",
            self.extensions_adequate,
            "marginals reproduce the base predictions exactly",
        );
        r.push(
            "extensions outcome-deterministic",
            self.extensions_deterministic,
            "sampled indicator values all in {0, 1}",
        );
        r
    }
}

/// Run the bit-flip demonstration: a fair-coin measurement M and the
/// measurement M' that outputs the flipped outcome of M.
pub fn bit_flip_extension_demo() -> Result<BitFlipExtensionDemo> {
    use crate::measurement::{build_quantum_theory, Povm};

    let half = Effect::new(HermitianOperator::identity(2).scale(0.5))?;
    let coin = Povm::new(vec![half.clone(), half])?;
    let theory = build_quantum_theory(
        &[DensityOperator::maximally_mixed(2)],
        &[coin.clone(), coin],
    )?;

    // System-level model: one ontic state, both measurements uniform.
    let mut model = OntologicalModel::new(vec!["l0".into()]);
    model.insert_epistemic("P0", vec![1.0])?;
    model.insert_responses("M0", vec![vec![0.5], vec![0.5]])?;
    model.insert_responses("M1", vec![vec![0.5], vec![0.5]])?;

    let xi_m = model.responses("M0").unwrap();
    let xi_mp = model.responses("M1").unwrap();
    let system_responses_equal = xi_m == xi_mp;

    let base = empirical_adequacy(&model, &theory, 1e-9)?;

    // Extend M; the definition of M' (flip the outcome of M) fixes its
    // extended representation to be the permutation of M's.
    let ext_m = ontic_extend(&model, "M0")?;
    let ext_mp = ext_m.permuted(&[1, 0])?;

    let mut disagreement_measure = Vec::new();
    for k in 0..2 {
        let mut worst = f64::INFINITY;
        for l in 0..1 {
            let a = &ext_m.interval_responses[l].intervals[k];
            let b = &ext_mp.interval_responses[l].intervals[k];
            worst = worst.min(a.disagreement(b));
        }
        disagreement_measure.push(worst);
    }

    let mu = model.epistemic("P0").unwrap();
    let mut extensions_adequate = true;
    for k in 0..2 {
        let expected = theory.prob(0, 0, k);
        if (ext_m.prediction(mu, k) - expected).abs() > 1e-9
            || (ext_mp.prediction(mu, k) - expected).abs() > 1e-9
        {
            extensions_adequate = false;
        }
    }

    let mut extensions_deterministic = true;
    for ext in [&ext_m, &ext_mp] {
        for k in 0..2 {
            for sample in 0..=20 {
                let la = sample as f64 / 20.0;
                let v = ext.response(k, 0, la);
                if v != 0.0 && v != 1.0 {
                    extensions_deterministic = false;
                }
            }
        }
    }

    Ok(BitFlipExtensionDemo {
        system_responses_equal,
        disagreement_measure,
        base_adequate: base.holds(),
        extensions_adequate,
        extensions_deterministic,
    })
}

/// A measurement violating the determinism-iff-sharp pattern.
#[derive(Debug, Clone, Serialize)]
pub struct DeterminismSharpReport {
    /// Sharp measurements represented indeterministically.
    pub sharp_indeterministic: Vec<String>,
    /// Unsharp measurements represented deterministically.
    pub unsharp_deterministic: Vec<String>,
    pub checked: usize,
}

impl DeterminismSharpReport {
    pub fn holds(&self) -> bool {
        self.sharp_indeterministic.is_empty() && self.unsharp_deterministic.is_empty()
    }

    pub fn to_report(&self) -> Report {
        let mut r = Report::new("outcome determinism iff sharp");
        r.push(
            "every sharp measurement deterministic",
            self.sharp_indeterministic.is_empty(),
            if self.sharp_indeterministic.is_empty() {
                format!("{} measurements checked", self.checked)
            } else {
                format!("violations: {:?}", self.sharp_indeterministic)
            },
        );
        r.push(
            "every unsharp measurement indeterministic",
            self.unsharp_deterministic.is_empty(),
            if self.unsharp_deterministic.is_empty() {
                "no unsharp measurement has all-0/1 responses".to_string()
            } else {
                format!("violations: {:?}", self.unsharp_deterministic)
            },
        );
        r
    }
}

/// Check outcome-deterministic representation against the sharpness flag of
/// every measurement in the theory.
pub fn verify_determinism_iff_sharp(
    model: &OntologicalModel,
    theory: &OperationalTheory,
    tau: f64,
) -> Result<DeterminismSharpReport> {
    let mut sharp_indeterministic = Vec::new();
    let mut unsharp_deterministic = Vec::new();
    for m in theory.measurements() {
        let det = is_outcome_deterministic(model, &m.label, tau)?;
        match (m.sharp, det) {
            (true, false) => sharp_indeterministic.push(m.label.clone()),
            (false, true) => unsharp_deterministic.push(m.label.clone()),
            _ => {}
        }
    }
    Ok(DeterminismSharpReport {
        sharp_indeterministic,
        unsharp_deterministic,
        checked: theory.measurements().len(),
    })
}

// --- JSON schema ---

#[derive(Serialize, Deserialize)]
struct ModelJson {
    ontic_states: Vec<String>,
    epistemic: BTreeMap<String, Vec<f64>>,
    responses: BTreeMap<String, Vec<Vec<f64>>>,
}

impl Serialize for OntologicalModel {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        ModelJson {
            ontic_states: self.ontic_states.clone(),
            epistemic: self.epistemic.clone(),
            responses: self.responses.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for OntologicalModel {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = ModelJson::deserialize(deserializer)?;
        let mut model = OntologicalModel::new(raw.ontic_states);
        for (label, mu) in raw.epistemic {
            model.insert_epistemic(label, mu).map_err(D::Error::custom)?;
        }
        for (label, rows) in raw.responses {
            model.insert_responses(label, rows).map_err(D::Error::custom)?;
        }
        Ok(model)
    }
}
