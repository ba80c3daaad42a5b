//! The explicit-constant calculus of the contraction argument: every
//! closed-form constant assembled from the standing-hypothesis inputs, the
//! smallness conditions they impose on the coupling, and the geometric tail
//! bound for the window-energy recursion together with a brute-force
//! fixed-point oracle.

use crate::error::{Error, Result};

/// Inputs of the constant calculus.
///
/// `energy_decay` and `window_transfer` have no closed form; when absent
/// they are assembled from the end-of-proof coefficient maxima (the doubled
/// coefficients left after the one-half absorption step), and the ledger
/// records which assembly was used.
#[derive(Debug, Clone, PartialEq)]
pub struct LedgerInputs {
    /// single-site Log-Sobolev-q constant (uniform in the boundary)
    pub single_site_ls: f64,
    /// five-site window Log-Sobolev-q constant
    pub window_ls: f64,
    /// exponential moment bound (log scale)
    pub moment_bound: f64,
    /// exponential moment scale
    pub moment_scale: f64,
    /// nearest-neighbour coupling size, in [0, 1)
    pub coupling: f64,
    pub q: f64,
    /// window-energy decay constant; `None` uses the recorded assembly
    pub energy_decay: Option<f64>,
    /// window-to-window transfer constant; `None` uses the recorded assembly
    pub window_transfer: Option<f64>,
}

impl LedgerInputs {
    pub fn validate(&self) -> Result<()> {
        let pos = [
            ("single_site_ls", self.single_site_ls),
            ("window_ls", self.window_ls),
            ("moment_bound", self.moment_bound),
            ("moment_scale", self.moment_scale),
        ];
        for (name, v) in pos {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("ledger input {name} must be positive, got {v}")));
            }
        }
        if !(self.coupling >= 0.0 && self.coupling < 1.0) {
            return Err(Error::Config(format!(
                "coupling must lie in [0, 1), got {}",
                self.coupling
            )));
        }
        if !(self.q > 1.0 && self.q <= 2.0) {
            return Err(Error::Config(format!("q must lie in (1, 2], got {}", self.q)));
        }
        for (name, v) in [
            ("energy_decay", self.energy_decay),
            ("window_transfer", self.window_transfer),
        ] {
            if let Some(v) = v {
                if !(v > 0.0) || !v.is_finite() {
                    return Err(Error::Config(format!(
                        "ledger input {name} must be positive, got {v}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Every explicit constant of the argument, together with the formula each
/// was computed from. Recomputation from `inputs` is deterministic, so
/// deriving twice reproduces the ledger bitwise.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantLedger {
    pub inputs: LedgerInputs,
    /// conjugate exponent, 1/p + 1/q = 1
    pub p: f64,
    /// spectral-gap constant implied by Log-Sobolev: 4c / ln 2
    pub c_hat: f64,
    /// splitting constant 2^{4q}
    pub c1: f64,
    /// covariance constant 2^6 2^{q/p} q
    pub c0: f64,
    /// window-energy recursion weight c1 C / eps
    pub k_prime: f64,
    /// energy-decay constant actually used (input or assembly)
    pub energy_decay: f64,
    pub energy_decay_defaulted: bool,
    /// window-transfer constant actually used (input or assembly)
    pub window_transfer: f64,
    pub window_transfer_defaulted: bool,
    /// block-smoothing coefficients of the plain gradient bound
    pub d1: f64,
    pub d2: f64,
    /// combined prefactor of the q-root gradient bound
    pub r: f64,
    /// one-step smoothing coefficients of the q-root gradient bound
    pub big_c1: f64,
    pub big_c2: f64,
    /// geometric series total 1/(1 - C2^2); `None` when C2 >= 1
    pub series_sum: Option<f64>,
    /// final chain Log-Sobolev constant; `None` when infeasible
    pub chain_ls: Option<f64>,
    /// the ratio branch c A (C1/C2 + C2 + C1); infinite as the coupling
    /// vanishes, which only reflects the bookkeeping, not the inequality
    pub chain_ls_ratio_branch: f64,
    /// the plain branch c A
    pub chain_ls_plain_branch: Option<f64>,
    /// set when the ratio branch diverges because C2 ~ 0
    pub zero_coupling_divergence: bool,
    pub feasible: bool,
}

/// Assembles the full ledger from its inputs.
pub fn derive_ledger(inputs: &LedgerInputs) -> Result<ConstantLedger> {
    inputs.validate()?;
    let q = inputs.q;
    let p = q / (q - 1.0);
    let c = inputs.single_site_ls;
    let big_c = inputs.window_ls;
    let k = inputs.moment_bound;
    let eps = inputs.moment_scale;
    let j = inputs.coupling;

    let c_hat = 4.0 * c / std::f64::consts::LN_2;
    let c1 = 2f64.powf(4.0 * q);
    let c0 = 64.0 * 2f64.powf(q / p) * q;
    let k_prime = c1 * big_c / eps;

    let jq = j.powf(q);
    let jq1 = j.powf(q - 1.0);
    // 1/(1 - J^{q-1}) and the double-step variants; finite since J < 1
    let geo1 = 1.0 / (1.0 - jq1);
    let geo2 = 1.0 / (1.0 - j.powf(2.0 * q - 2.0));

    let (t_const, t_defaulted) = match inputs.window_transfer {
        Some(t) => (t, false),
        None => {
            let t = (2.0 * geo2 * big_c * c1 * c1 / eps)
                .max(geo2 * c1 * c1 * geo1)
                .max(2.0 * geo2 * (c1 + 2.0) * c1 * k / eps * geo1);
            (t, true)
        }
    };
    let (d_const, d_defaulted) = match inputs.energy_decay {
        Some(d) => (d, false),
        None => {
            let h_coeff = 2.0 * jq
                * (t_const * jq * c1 * big_c / eps
                    + 3.0 * c1 * c * k / eps
                    + 2.0 * c1 * c1 * c * k / eps);
            let d = (2.0 * c1)
                .max(2.0 + c_hat * h_coeff)
                .max(2.0 * (jq * c1 * big_c * t_const / eps + c1 * c1))
                .max(2.0 * j * c1 * big_c * t_const / eps);
            (d, true)
        }
    };

    let d2 = jq
        * (2.0 * c_hat * c1 * k / eps
            + 2.0 * c1 * big_c * d_const / eps
            + 2.0 * d_const * c1 * big_c / eps * jq1 * geo1);
    let d1 = c1 * q
        + 3.0 * d_const * jq * c1 * big_c / eps
        + 2.0 * d_const * jq * c1 * big_c / eps * jq1 * geo1;

    let r = c1 + c1 / q.powf(q) * (c0.powf(q) * big_c * d_const / eps + c0.powf(q) * c_hat * k / eps);
    let big_c1 = r + 4.0 * r * jq + 8.0 * r * jq * geo1;
    let big_c2 = r * jq * (4.0 + 8.0 * geo1);

    let feasible = big_c2 < 1.0;
    let series_sum = if feasible { Some(1.0 / (1.0 - big_c2 * big_c2)) } else { None };
    let zero_coupling_divergence = big_c2 < 1e-300;
    let (chain_ls, ratio_branch, plain_branch) = match series_sum {
        None => (None, f64::INFINITY, None),
        Some(a) => {
            let plain = c * a;
            let ratio = if zero_coupling_divergence {
                f64::INFINITY
            } else {
                c * a * (big_c1 / big_c2 + big_c2 + big_c1)
            };
            let value = if zero_coupling_divergence { plain } else { ratio.max(plain) };
            (Some(value), ratio, Some(plain))
        }
    };

    Ok(ConstantLedger {
        inputs: inputs.clone(),
        p,
        c_hat,
        c1,
        c0,
        k_prime,
        energy_decay: d_const,
        energy_decay_defaulted: d_defaulted,
        window_transfer: t_const,
        window_transfer_defaulted: t_defaulted,
        d1,
        d2,
        r,
        big_c1,
        big_c2,
        series_sum,
        chain_ls,
        chain_ls_ratio_branch: ratio_branch,
        chain_ls_plain_branch: plain_branch,
        zero_coupling_divergence,
        feasible,
    })
}

impl ConstantLedger {
    /// Two-column table rows: (name, formula, value).
    pub fn rows(&self) -> Vec<(&'static str, &'static str, f64)> {
        let mut rows = vec![
            ("c", "single-site LSq constant (input)", self.inputs.single_site_ls),
            ("C", "window LSq constant (input)", self.inputs.window_ls),
            ("K", "moment bound (input)", self.inputs.moment_bound),
            ("eps", "moment scale (input)", self.inputs.moment_scale),
            ("J", "coupling size (input)", self.inputs.coupling),
            ("q", "gradient exponent (input)", self.inputs.q),
            ("p", "q/(q-1)", self.p),
            ("c_hat", "4c/ln 2", self.c_hat),
            ("c1", "2^{4q}", self.c1),
            ("c0", "2^6 2^{q/p} q", self.c0),
            ("K'", "c1 C/eps", self.k_prime),
            ("D", "energy decay", self.energy_decay),
            ("T", "window transfer", self.window_transfer),
            ("D1", "c1 q + 3D J^q c1 C/eps + 2D J^q c1 C J^{q-1}/(eps(1-J^{q-1}))", self.d1),
            (
                "D2",
                "J^q (2 c_hat c1 K/eps + 2 c1 C D/eps + 2 D c1 C J^{q-1}/(eps(1-J^{q-1})))",
                self.d2,
            ),
            ("R", "c1 + c1/q^q (c0^q C D/eps + c0^q c_hat K/eps)", self.r),
            ("C1", "R + 4RJ^q + 8RJ^q/(1-J^{q-1})", self.big_c1),
            ("C2", "R J^q (4 + 8/(1-J^{q-1}))", self.big_c2),
        ];
        rows.push((
            "A",
            "1/(1-C2^2)",
            self.series_sum.unwrap_or(f64::INFINITY),
        ));
        rows.push((
            "chain_ls",
            "max{cA(C1/C2 + C2 + C1), cA}",
            self.chain_ls.unwrap_or(f64::INFINITY),
        ));
        rows
    }
}

/// One smallness condition on the coupling.
#[derive(Debug, Clone)]
pub struct ConditionCheck {
    pub id: &'static str,
    pub pass: bool,
    /// threshold minus attained value; nonnegative when the condition holds
    pub slack: f64,
}

/// Feasibility of the coupling against every smallness condition the
/// argument imposes, plus the largest feasible coupling by bisection.
#[derive(Debug, Clone)]
pub struct FeasibilityReport {
    pub conditions: Vec<ConditionCheck>,
    pub all_pass: bool,
    pub j_star: f64,
}

fn condition_checks(ledger: &ConstantLedger) -> Vec<ConditionCheck> {
    let j = ledger.inputs.coupling;
    let q = ledger.inputs.q;
    let kp = ledger.k_prime;
    let eps = ledger.inputs.moment_scale;
    let big_c = ledger.inputs.window_ls;
    let c1 = ledger.c1;
    let t = ledger.window_transfer;

    let recursion = j * kp + j.powf(q) * kp * j.powf(q - 1.0);
    let summability = 2f64.powf(q) * ledger.d2.sqrt();
    let absorption =
        1.0 - j.powf(q) * (2.0 * big_c * c1 * c1 / eps + j.powf(q) * c1 * big_c * t / eps + big_c * c1 / eps);

    vec![
        ConditionCheck {
            id: "recursion-contraction",
            pass: j <= 1.0 && recursion <= 1.0,
            slack: 1.0 - recursion,
        },
        ConditionCheck { id: "block-smoothing", pass: ledger.d2 < 1.0, slack: 1.0 - ledger.d2 },
        ConditionCheck {
            id: "gradient-smoothing",
            pass: ledger.big_c2 < 1.0,
            slack: 1.0 - ledger.big_c2,
        },
        ConditionCheck {
            id: "summability",
            pass: summability < 0.5,
            slack: 0.5 - summability,
        },
        ConditionCheck {
            id: "energy-absorption",
            pass: absorption > 0.5,
            slack: absorption - 0.5,
        },
    ]
}

/// Evaluates every smallness condition at the ledger's coupling and bisects
/// the largest coupling (1e-10 resolution) satisfying all of them with the
/// other inputs fixed. Defaulted constants are reassembled per coupling.
pub fn feasibility_thresholds(ledger: &ConstantLedger) -> Result<FeasibilityReport> {
    let conditions = condition_checks(ledger);
    let all_pass = conditions.iter().all(|c| c.pass);

    let pass_at = |j: f64| -> bool {
        let mut inputs = ledger.inputs.clone();
        inputs.coupling = j;
        if !ledger.energy_decay_defaulted {
            inputs.energy_decay = Some(ledger.energy_decay);
        }
        if !ledger.window_transfer_defaulted {
            inputs.window_transfer = Some(ledger.window_transfer);
        }
        match derive_ledger(&inputs) {
            Ok(l) => condition_checks(&l).iter().all(|c| c.pass),
            Err(_) => false,
        }
    };

    let mut lo = 0.0;
    let mut hi = 1.0 - 1e-12;
    let j_star = if pass_at(hi) {
        hi
    } else {
        while hi - lo > 1e-10 {
            let mid = 0.5 * (lo + hi);
            if pass_at(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    Ok(FeasibilityReport { conditions, all_pass, j_star })
}

/// Geometric bound for the base value of the window-energy recursion:
/// `(1/(1 - J^{2q-2})) sum_n J^{n(q-1)} G(4n+4)`.
///
/// `g[n]` holds `G(4n+4)`. When the sequence is eventually constant, pass
/// the constant as `tail_constant` and the geometric remainder is added.
pub fn tail_bound(
    g: &[f64],
    j: f64,
    q: f64,
    k_prime: f64,
    tail_constant: Option<f64>,
) -> Result<f64> {
    if j.powf(q - 1.0) >= 1.0 {
        return Err(Error::Divergent(format!(
            "the geometric series needs J^(q-1) < 1, got J = {j}"
        )));
    }
    if !recursion_condition(j, q, k_prime) {
        return Err(Error::Config(format!(
            "coupling J = {j} violates the recursion smallness condition"
        )));
    }
    if g.iter().any(|v| *v < 0.0) {
        return Err(Error::Domain("the driving sequence must be nonnegative".into()));
    }
    let ratio = j.powf(q - 1.0);
    let mut sum = 0.0;
    let mut pow = 1.0;
    for v in g {
        sum += pow * v;
        pow *= ratio;
    }
    if let Some(gc) = tail_constant {
        if gc < 0.0 {
            return Err(Error::Domain("tail constant must be nonnegative".into()));
        }
        // remaining geometric mass from index g.len() on
        if ratio > 0.0 {
            sum += gc * pow / (1.0 - ratio);
        }
    }
    Ok(sum / (1.0 - j.powf(2.0 * q - 2.0)))
}

/// The smallness condition the recursion bound requires:
/// `J <= 1` and `J K' + J^q K' J^{q-1} <= 1`.
pub fn recursion_condition(j: f64, q: f64, k_prime: f64) -> bool {
    j <= 1.0 && j * k_prime + j.powf(q) * k_prime * j.powf(q - 1.0) <= 1.0
}

/// Maximal solution of the truncated recursion system
///
/// `P(4) = G(4) + J^q K' P(8)`
/// `P(4k) = G(4k) + J^q K' P(4k-4) + J^q K' P(4k+4)` for `2 <= k <= n_cut`
///
/// with `P` capped at `cap` beyond the truncation index, found by fixed-point
/// iteration from the cap. Returns `P(4k)` for `k = 1..=n_cut`. This is the
/// ground truth the geometric tail bound has to dominate.
pub fn recursion_oracle(
    g: &[f64],
    j: f64,
    q: f64,
    k_prime: f64,
    n_cut: usize,
    cap: f64,
) -> Result<Vec<f64>> {
    if n_cut == 0 {
        return Err(Error::Config("the oracle needs at least one index".into()));
    }
    let w = j.powf(q) * k_prime;
    let gv = |k: usize| -> f64 { g.get(k - 1).copied().unwrap_or(0.0) };
    let mut p = vec![cap.max(0.0); n_cut];
    let max_sweeps = 100_000;
    for sweep in 0..max_sweeps {
        let mut delta: f64 = 0.0;
        for k in 1..=n_cut {
            let up = if k == n_cut { cap } else { p[k] };
            let down = if k == 1 { 0.0 } else { p[k - 2] };
            let next = if k == 1 { gv(1) + w * up } else { gv(k) + w * down + w * up };
            delta = delta.max((next - p[k - 1]).abs());
            p[k - 1] = next;
        }
        if delta <= 1e-15 * (1.0 + cap.abs()) {
            return Ok(p);
        }
        if !delta.is_finite() {
            return Err(Error::OracleFailure(sweep));
        }
    }
    Err(Error::OracleFailure(max_sweeps))
}
