//! Joint Gaussian covariance models of the symmetric test channels and
//! differential-entropy evaluation of the achievable rate expressions.
//!
//! All entropies are in bits. Variables whose variance is [`ABSENT`] are left
//! out of the model; the rate evaluators silently drop them from every set,
//! so a missing layer contributes nothing.
//!
//! [`ABSENT`]: crate::types::ABSENT

use std::f64::consts::{E, LN_2, PI};
use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::types::ChannelParams;

/// Smallest pivot accepted in the symmetric factorization.
pub const PIVOT_TOL: f64 = 1e-12;
/// Smallest eigenvalue accepted as positive semidefinite.
pub const PSD_TOL: f64 = 1e-10;
/// Negative information values above this are rounding noise and clamp to 0.
pub const CLAMP_TOL: f64 = 1e-9;

/// `log2(2*pi*e)`, the entropy cost of one Gaussian dimension of unit variance.
pub fn log2_2pie() -> f64 {
    (2.0 * PI * E).log2()
}

/// Symbolic random variable of the test channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    X,
    /// Common codeword of layer `k`.
    U(usize),
    /// Private codeword of layer `k` at node `i` (both 1-based).
    Y(usize, usize),
    /// The single top-layer codeword.
    Top,
}

/// Ordered list of distinct variables.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VariableSet(Vec<Var>);

impl VariableSet {
    pub fn new(vars: impl IntoIterator<Item = Var>) -> Result<Self> {
        let vars: Vec<Var> = vars.into_iter().collect();
        for (i, v) in vars.iter().enumerate() {
            if vars[..i].contains(v) {
                return Err(Error::DuplicateVariable(format!("{v:?}")));
            }
        }
        Ok(Self(vars))
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    /// Parses labels such as `"X"`, `"U1"`, `"Y1_2"` against a model.
    pub fn parse(model: &CovarianceModel, labels: &[&str]) -> Result<Self> {
        let vars = labels
            .iter()
            .map(|l| model.var_by_label(l).ok_or_else(|| Error::UnknownVariable((*l).to_string())))
            .collect::<Result<Vec<_>>>()?;
        Self::new(vars)
    }

    pub fn vars(&self) -> &[Var] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Covariance matrix of `(X, U_k, Y_{k,i}, top)` with its label map.
#[derive(Debug, Clone)]
pub struct CovarianceModel {
    n: usize,
    top_layer: usize,
    vars: Vec<Var>,
    matrix: DMatrix<f64>,
}

/// Builds the covariance model; absent variables are omitted.
pub fn build_covariance(params: &ChannelParams) -> Result<CovarianceModel> {
    params.validate()?;
    let n = params.n;
    for (k, layer) in params.layers.iter().enumerate() {
        if !layer.has_private() {
            continue;
        }
        // Eigenvalues of the equicorrelation matrix are 1 - rho (n - 1 times)
        // and 1 + (n - 1) rho.
        let min_eig = (1.0 - layer.rho).min(1.0 + (n as f64 - 1.0) * layer.rho);
        let lower = -1.0 / (n as f64 - 1.0);
        if layer.rho > 1.0 || layer.rho <= lower {
            return Err(Error::InvalidParameters(format!(
                "layer {} rho = {} outside ({lower}, 1]; noise correlation matrix has smallest eigenvalue {min_eig:.6e}",
                k + 1,
                layer.rho
            )));
        }
    }

    let mut vars = vec![Var::X];
    let mut noise_var = vec![0.0];
    for (k, layer) in params.layers.iter().enumerate() {
        if layer.has_common() {
            vars.push(Var::U(k + 1));
            noise_var.push(layer.sigma_u_sq);
        }
        if layer.has_private() {
            for i in 1..=n {
                vars.push(Var::Y(k + 1, i));
                noise_var.push(layer.sigma_q_sq);
            }
        }
    }
    if params.has_top() {
        vars.push(Var::Top);
        noise_var.push(params.top_sigma_sq);
    }

    let m = vars.len();
    let matrix = DMatrix::from_fn(m, m, |a, b| {
        if a == b {
            return 1.0 + noise_var[a];
        }
        match (vars[a], vars[b]) {
            (Var::Y(ka, _), Var::Y(kb, _)) if ka == kb => {
                let layer = &params.layers[ka - 1];
                1.0 + layer.rho * layer.sigma_q_sq
            }
            _ => 1.0,
        }
    });
    Ok(CovarianceModel { n, top_layer: params.layers.len() + 1, vars, matrix })
}

impl CovarianceModel {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn labels(&self) -> Vec<String> {
        self.vars.iter().map(|v| self.label(*v)).collect()
    }

    pub fn label(&self, v: Var) -> String {
        match v {
            Var::X => "X".into(),
            Var::U(k) => format!("U{k}"),
            Var::Y(k, i) => format!("Y{k}_{i}"),
            Var::Top => format!("Y{}", self.top_layer),
        }
    }

    pub fn var_by_label(&self, label: &str) -> Option<Var> {
        self.vars.iter().copied().find(|v| self.label(*v) == label)
    }

    pub fn index_of(&self, v: Var) -> Option<usize> {
        self.vars.iter().position(|w| *w == v)
    }

    pub fn contains(&self, v: Var) -> bool {
        self.index_of(v).is_some()
    }

    pub fn covariance(&self, a: Var, b: Var) -> Option<f64> {
        Some(self.matrix[(self.index_of(a)?, self.index_of(b)?)])
    }

    pub fn min_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.matrix.clone()).eigenvalues.min()
    }

    fn indices(&self, vars: &[Var]) -> Result<Vec<usize>> {
        vars.iter()
            .map(|v| self.index_of(*v).ok_or_else(|| Error::UnknownVariable(self.label(*v))))
            .collect()
    }

    /// Natural-log determinant of `Σ_{target|cond}` via a Cholesky
    /// factorization of the joint block ordered `cond` first.
    fn ln_det_schur(&self, cond: &[usize], target: &[usize]) -> Result<f64> {
        let idx: Vec<usize> = cond.iter().chain(target).copied().collect();
        let m = idx.len();
        let mut l = vec![0.0; m * m];
        let mut ln_det = 0.0;
        for j in 0..m {
            let mut d = self.matrix[(idx[j], idx[j])];
            for k in 0..j {
                d -= l[j * m + k] * l[j * m + k];
            }
            if d < PIVOT_TOL {
                let label = self.label(self.vars[idx[j]]);
                return Err(if j < cond.len() {
                    Error::DegenerateConditioning { label, pivot: d }
                } else {
                    Error::SingularEntropy { label, pivot: d }
                });
            }
            let ljj = d.sqrt();
            l[j * m + j] = ljj;
            if j >= cond.len() {
                ln_det += d.ln();
            }
            for i in j + 1..m {
                let mut s = self.matrix[(idx[i], idx[j])];
                for k in 0..j {
                    s -= l[i * m + k] * l[j * m + k];
                }
                l[i * m + j] = s / ljj;
            }
        }
        Ok(ln_det)
    }

    /// `h(a | b)` in bits for raw variable lists (no duplicate check).
    fn entropy_of(&self, a: &[Var], b: &[Var]) -> Result<f64> {
        let ia = self.indices(a)?;
        let ib = self.indices(b)?;
        let ln_det = self.ln_det_schur(&ib, &ia)?;
        Ok(0.5 * (ia.len() as f64 * log2_2pie() + ln_det / LN_2))
    }

    /// Like [`Self::entropy_of`] but drops variables the model does not contain.
    pub(crate) fn entropy_present(&self, a: &[Var], b: &[Var]) -> Result<f64> {
        let a: Vec<Var> = a.iter().copied().filter(|v| self.contains(*v)).collect();
        if a.is_empty() {
            return Ok(0.0);
        }
        let b: Vec<Var> = b.iter().copied().filter(|v| self.contains(*v)).collect();
        self.entropy_of(&a, &b)
    }

    /// `Var(X | observed)` over the observed variables the model contains.
    pub(crate) fn mmse_present(&self, observed: &[Var]) -> Result<f64> {
        let obs: Vec<Var> = observed.iter().copied().filter(|v| self.contains(*v)).collect();
        let io = self.indices(&obs)?;
        let ix = self.indices(&[Var::X])?;
        Ok(self.ln_det_schur(&io, &ix)?.exp())
    }
}

fn check_disjoint(model: &CovarianceModel, a: &VariableSet, b: &VariableSet) -> Result<()> {
    match a.vars().iter().find(|v| b.vars().contains(v)) {
        Some(v) => Err(Error::OverlappingSets(model.label(*v))),
        None => Ok(()),
    }
}

/// Differential entropy `h(a | b)` in bits; `b` may be empty.
pub fn cond_entropy(model: &CovarianceModel, a: &VariableSet, b: &VariableSet) -> Result<f64> {
    if a.is_empty() {
        return Err(Error::Domain("entropy of an empty set".into()));
    }
    check_disjoint(model, a, b)?;
    model.entropy_of(a.vars(), b.vars())
}

/// `I(a; b) = h(a) - h(a | b)`, clamped at zero for rounding-level negatives.
pub fn mutual_information(model: &CovarianceModel, a: &VariableSet, b: &VariableSet) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Ok(0.0);
    }
    check_disjoint(model, a, b)?;
    let i = model.entropy_of(a.vars(), &[])? - model.entropy_of(a.vars(), b.vars())?;
    Ok(clamp_info(i))
}

/// Minimum mean-squared error of estimating `X` from `observed`.
pub fn mmse_distortion(model: &CovarianceModel, observed: &VariableSet) -> Result<f64> {
    if observed.is_empty() {
        return Err(Error::Domain("mmse needs at least one observation".into()));
    }
    if observed.vars().contains(&Var::X) {
        return Err(Error::Domain("X cannot be observed".into()));
    }
    let io = model.indices(observed.vars())?;
    let ix = model.indices(&[Var::X])?;
    Ok(model.ln_det_schur(&io, &ix)?.exp())
}

pub(crate) fn clamp_info(v: f64) -> f64 {
    if v < 0.0 && v > -CLAMP_TOL {
        0.0
    } else {
        v
    }
}

/// One named summand of a rate expression.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateTerm {
    pub name: String,
    pub value: f64,
}

/// Rates of a scheme together with the terms they were summed from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateEvaluation {
    pub r: f64,
    pub r_repair: f64,
    pub r_total: f64,
    /// Summands of `r`.
    pub terms: Vec<RateTerm>,
    /// Summands of `r_repair`, already clamped at zero where applicable.
    pub repair_terms: Vec<RateTerm>,
}

impl RateEvaluation {
    fn from_terms(terms: Vec<RateTerm>, repair_terms: Vec<RateTerm>) -> Self {
        let r = clamp_info(terms.iter().map(|t| t.value).sum());
        let r_repair = clamp_info(repair_terms.iter().map(|t| t.value).sum());
        Self { r, r_repair, r_total: r + r_repair, terms, repair_terms }
    }

    pub fn to_rate_point(&self) -> crate::types::RatePoint {
        crate::types::RatePoint::new(self.r, self.r_repair)
    }
}

impl fmt::Display for RateEvaluation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "R   = {:.9}", self.r)?;
        writeln!(f, "R_r = {:.9}", self.r_repair)?;
        write!(f, "R_t = {:.9}", self.r_total)
    }
}

/// Entropy terms evaluated under a node ordering: "the first m nodes" means
/// `order[..m]` and "node n" means `order[n - 1]`.
struct Terms<'a> {
    model: &'a CovarianceModel,
    order: Vec<usize>,
}

impl<'a> Terms<'a> {
    fn new(model: &'a CovarianceModel, order: Option<&[usize]>) -> Result<Self> {
        let n = model.n;
        let order = match order {
            Some(o) => {
                let mut sorted = o.to_vec();
                sorted.sort_unstable();
                if sorted != (1..=n).collect::<Vec<_>>() {
                    return Err(Error::Domain(format!("node order {o:?} is not a permutation of 1..={n}")));
                }
                o.to_vec()
            }
            None => (1..=n).collect(),
        };
        Ok(Self { model, order })
    }

    fn first(&self, m: usize) -> &[usize] {
        &self.order[..m]
    }

    fn last(&self) -> usize {
        self.order[self.model.n - 1]
    }

    /// Private codewords of layers `from..=to` at the given nodes.
    fn ys(&self, from: usize, to: usize, nodes: &[usize]) -> Vec<Var> {
        (from..=to).flat_map(|k| nodes.iter().map(move |&i| Var::Y(k, i))).collect()
    }

    fn us(&self, from: usize, to: usize) -> Vec<Var> {
        (from..=to).map(Var::U).collect()
    }

    fn h(&self, a: &[Var], b: &[Var]) -> Result<f64> {
        self.model.entropy_present(a, b)
    }

    /// `(1/k) I(U_k; X | Y_{<k, first k}, U_{<k})`, the common-codeword cost.
    fn common(&self, k: usize) -> Result<f64> {
        let n = self.model.n;
        let mut given = self.ys(1, k - 1, self.first(k));
        given.extend(self.us(1, k - 1));
        let mut given_x = vec![Var::X];
        given_x.extend(self.ys(1, k - 1, self.first(n)));
        given_x.extend(self.us(1, k - 1));
        Ok((self.h(&[Var::U(k)], &given)? - self.h(&[Var::U(k)], &given_x)?) / k as f64)
    }

    /// `(1/k) h(Y_{k, first k} | Y_{<k, first k}, U_{<=k})` for `k >= 2`, and
    /// `h(Y_{1,n} | U_1)` for `k = 1`.
    fn private(&self, k: usize) -> Result<f64> {
        if k == 1 {
            return self.h(&[Var::Y(1, self.last())], &[Var::U(1)]);
        }
        let mut given = self.ys(1, k - 1, self.first(k));
        given.extend(self.us(1, k));
        Ok(self.h(&self.ys(k, k, self.first(k)), &given)? / k as f64)
    }

    /// `I(top; X | Y_{<=layers, first m}, U_{<=layers})`.
    fn top_information(&self, layers: usize, m: usize) -> Result<f64> {
        let mut given = self.ys(1, layers, self.first(m));
        given.extend(self.us(1, layers));
        let mut given_x = given.clone();
        given_x.push(Var::X);
        Ok(clamp_info(self.h(&[Var::Top], &given)? - self.h(&[Var::Top], &given_x)?))
    }

    /// `(1/n) h(Y_{<=layers, all} | X, U_{<=layers})`, the binning credit.
    fn credit(&self, layers: usize) -> Result<f64> {
        let n = self.model.n;
        let mut given = vec![Var::X];
        given.extend(self.us(1, layers));
        Ok(self.h(&self.ys(1, layers, self.first(n)), &given)? / n as f64)
    }

    /// Unclamped repair summand of layer `k`.
    fn repair(&self, k: usize) -> Result<f64> {
        let n = self.model.n;
        let mut given = self.us(1, k);
        given.extend(self.ys(k, k, self.first(n - 1)));
        given.extend(self.ys(1, k - 1, self.first(n)));
        let missing = self.h(&[Var::Y(k, self.last())], &given)?;
        let mut given_x = vec![Var::X];
        given_x.extend(self.ys(1, k - 1, self.first(n)));
        given_x.extend(self.us(1, k));
        let credit = self.h(&self.ys(k, k, self.first(n)), &given_x)? / n as f64;
        Ok(missing - credit)
    }
}

fn term(name: impl Into<String>, value: f64) -> RateTerm {
    RateTerm { name: name.into(), value }
}

fn check_layers(params: &ChannelParams, expected: usize, what: &str) -> Result<()> {
    if params.layers.len() != expected {
        return Err(Error::InvalidParameters(format!(
            "{what} with n = {} needs {expected} layers below the top, got {}",
            params.n,
            params.layers.len()
        )));
    }
    Ok(())
}

/// Distributed repair: layers `1..=n-2` and a single top codeword shared by
/// `(n, n-1)` MDS coding. Requires `n >= 3`.
pub fn theorem3_rates(params: &ChannelParams) -> Result<RateEvaluation> {
    theorem3_rates_ordered(params, None)
}

/// [`theorem3_rates`] under an explicit node ordering.
pub fn theorem3_rates_ordered(params: &ChannelParams, order: Option<&[usize]>) -> Result<RateEvaluation> {
    let n = params.n;
    if n < 3 {
        return Err(Error::InvalidParameters("distributed repair needs n >= 3".into()));
    }
    check_layers(params, n - 2, "distributed repair")?;
    let model = build_covariance(params)?;
    let t = Terms::new(&model, order)?;
    let top = n - 2;

    let mut terms = Vec::new();
    for k in 1..=top {
        terms.push(term(format!("common[{k}]"), t.common(k)?));
    }
    for k in 1..=top {
        terms.push(term(format!("private[{k}]"), t.private(k)?));
    }
    terms.push(term("top", t.top_information(top, n - 1)? / (n - 1) as f64));
    terms.push(term("credit", -t.credit(top)?));

    let mut repair_terms = Vec::new();
    for k in 1..=top {
        repair_terms.push(term(format!("repair[{k}]"), t.repair(k)?.max(0.0) / (n - 1) as f64));
    }
    Ok(RateEvaluation::from_terms(terms, repair_terms))
}

/// Repair through a collaborating repair node: layers `1..=n-1` and a top
/// codeword split across the `n` nodes. Requires `n >= 2`.
///
/// For `n = 2` the repair rate is the two-node common-message scheme's
/// repair rate.
pub fn theorem4_rates(params: &ChannelParams) -> Result<RateEvaluation> {
    theorem4_rates_ordered(params, None)
}

/// [`theorem4_rates`] under an explicit node ordering.
pub fn theorem4_rates_ordered(params: &ChannelParams, order: Option<&[usize]>) -> Result<RateEvaluation> {
    let n = params.n;
    check_layers(params, n - 1, "repair-node scheme")?;
    let model = build_covariance(params)?;
    let t = Terms::new(&model, order)?;
    let top = n - 1;
    let top_info = t.top_information(top, n)? / n as f64;

    let mut terms = Vec::new();
    for k in 1..=top {
        terms.push(term(format!("common[{k}]"), t.common(k)?));
    }
    for k in 1..=top {
        terms.push(term(format!("private[{k}]"), t.private(k)?));
    }
    terms.push(term("top", top_info));
    terms.push(term("credit", -t.credit(top)?));

    let mut repair_terms = Vec::new();
    for k in 1..=top {
        repair_terms.push(term(format!("repair[{k}]"), t.repair(k)?.max(0.0)));
    }
    repair_terms.push(term("repair[top]", top_info));
    Ok(RateEvaluation::from_terms(terms, repair_terms))
}

/// Operational rate of the layered scheme without repair information whose
/// top layer is one MDS-coded codeword. Requires `n >= 3` and no common
/// codewords.
pub fn prop1_rate(params: &ChannelParams) -> Result<RateEvaluation> {
    let n = params.n;
    if n < 3 {
        return Err(Error::InvalidParameters("the layered baseline needs n >= 3".into()));
    }
    check_layers(params, n - 2, "layered baseline")?;
    if params.layers.iter().any(|l| l.has_common()) {
        return Err(Error::InvalidParameters("the layered baseline has no common codewords".into()));
    }
    // Without common codewords the distributed-repair R is exactly this rate.
    let full = theorem3_rates(params)?;
    Ok(RateEvaluation::from_terms(full.terms, Vec::new()))
}

/// Operational rate of the plain layered scheme: every layer `1..=n-1`,
/// including the last, has one private codeword per node and no top codeword.
pub fn prp_rate(params: &ChannelParams) -> Result<RateEvaluation> {
    let n = params.n;
    check_layers(params, n - 1, "plain layered scheme")?;
    if params.layers.iter().any(|l| l.has_common()) || params.has_top() {
        return Err(Error::InvalidParameters("the plain layered scheme has no common or top codewords".into()));
    }
    let model = build_covariance(params)?;
    let t = Terms::new(&model, None)?;
    let mut terms = Vec::new();
    for k in 1..n {
        terms.push(term(format!("private[{k}]"), t.private(k)?));
    }
    terms.push(term("credit", -t.credit(n - 1)?));
    Ok(RateEvaluation::from_terms(terms, Vec::new()))
}
