//! Main terms and error envelopes of summatory-function asymptotics.
//!
//! An [`AsymptoticModel`] pairs `n ↦ main(n)` with `n ↦ envelope(n)`, the
//! magnitude inside the claimed `O(·)` or `o(·)`. The mean-value products
//! (Wirsing, Delange, Kubilius) are truncated at a prime bound and a power
//! bound; everything truncated is reported, never silently absorbed.

use std::fmt;
use std::sync::Arc;

use crate::arith::{builtins, FunctionSpec, Kind, PointwiseRule, Registry};
use crate::compensated::CompensatedSum;
use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadratureConfig};
use crate::sieve::primes_up_to;
use crate::special::recip_gamma;

pub type ModelRule = Arc<dyn Fn(u64) -> Result<f64> + Send + Sync>;

/// Prime bounds at which the divergence heuristic samples partial sums.
pub const DIVERGENCE_BOUNDS: [u64; 4] = [1_000, 10_000, 100_000, 1_000_000];

/// Floor for any model involving `ln ln n`.
pub const LN_LN_FLOOR: u64 = 3;

/// Exponent `1/2 + ε` of the `e^{O((ln ln n)^{1/2+ε})}` envelope, `ε = 0.1`.
pub const NORMAL_ORDER_ENVELOPE_POWER: f64 = 0.6;

#[derive(Clone)]
pub struct AsymptoticModel {
    name: String,
    claim: String,
    main: ModelRule,
    envelope: ModelRule,
    claimed_exponent: Option<f64>,
    strict_decay: bool,
    n_floor: u64,
}

impl fmt::Debug for AsymptoticModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AsymptoticModel")
            .field("name", &self.name)
            .field("claim", &self.claim)
            .field("claimed_exponent", &self.claimed_exponent)
            .field("strict_decay", &self.strict_decay)
            .field("n_floor", &self.n_floor)
            .finish_non_exhaustive()
    }
}

impl AsymptoticModel {
    pub fn new<M, E>(name: impl Into<String>, claim: impl Into<String>, main: M, envelope: E) -> Self
    where
        M: Fn(u64) -> Result<f64> + Send + Sync + 'static,
        E: Fn(u64) -> Result<f64> + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            claim: claim.into(),
            main: Arc::new(main),
            envelope: Arc::new(envelope),
            claimed_exponent: None,
            strict_decay: false,
            n_floor: 1,
        }
    }

    pub fn with_claimed_exponent(mut self, alpha: f64) -> Self {
        self.claimed_exponent = Some(alpha);
        self
    }

    /// Marks an `o(·)` claim: residual/envelope must tend to zero.
    pub fn with_strict_decay(mut self) -> Self {
        self.strict_decay = true;
        self
    }

    pub fn with_floor(mut self, n_floor: u64) -> Self {
        self.n_floor = n_floor;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// The asymptotic statement the model encodes, for reports.
    pub fn claim(&self) -> &str {
        &self.claim
    }

    pub fn claimed_exponent(&self) -> Option<f64> {
        self.claimed_exponent
    }

    pub fn strict_decay(&self) -> bool {
        self.strict_decay
    }

    pub fn n_floor(&self) -> u64 {
        self.n_floor
    }

    fn check_floor(&self, n: u64) -> Result<()> {
        if n < self.n_floor {
            return Err(Error::BelowModelFloor {
                n,
                floor: self.n_floor,
            });
        }
        Ok(())
    }

    pub fn main(&self, n: u64) -> Result<f64> {
        self.check_floor(n)?;
        (self.main)(n)
    }

    pub fn envelope(&self, n: u64) -> Result<f64> {
        self.check_floor(n)?;
        (self.envelope)(n)
    }
}

fn ln_ln(n: u64) -> f64 {
    (n as f64).ln().ln()
}

/// `Σ_{p ≤ x} f(p)/p` for every `x`, from prefix sums over the primes up to a
/// fixed bound.
#[derive(Debug, Clone)]
pub struct PrimeReciprocalSums {
    primes: Vec<u64>,
    prefix: Vec<f64>,
}

impl PrimeReciprocalSums {
    pub fn new(spec: &FunctionSpec, bound: u64) -> Result<Self> {
        let shadow = match spec.kind() {
            Kind::StronglyAdditive | Kind::Additive => spec.strongly_additive_shadow()?,
            other => {
                return Err(Error::WrongKind {
                    function: spec.name().to_string(),
                    reason: format!("mean over primes needs an additive function, got {other:?}"),
                })
            }
        };
        let primes = primes_up_to(bound);
        let mut acc = CompensatedSum::new();
        let mut prefix = Vec::with_capacity(primes.len());
        for &p in &primes {
            acc.add(shadow.at_prime_power(p, 1)? / p as f64);
            prefix.push(acc.value());
        }
        Ok(Self { primes, prefix })
    }

    pub fn bound_prime(&self) -> Option<u64> {
        self.primes.last().copied()
    }

    /// The sum over `p ≤ x`; `x` must not exceed the construction bound.
    pub fn at(&self, x: u64) -> f64 {
        let k = self.primes.partition_point(|&p| p <= x);
        if k == 0 {
            0.0
        } else {
            self.prefix[k - 1]
        }
    }
}

/// Mean value of a strongly additive function: `A_n = Σ_{p≤n} f(p)/p`.
/// An additive function is replaced by its strongly additive shadow.
pub fn strongly_additive_mean(spec: &FunctionSpec, n: u64) -> Result<f64> {
    Ok(PrimeReciprocalSums::new(spec, n)?.at(n))
}

/// `n ln n` (for `ln φ`) or `n ln ln n` (for ω, Ω), each with envelope `n`.
pub fn additive_mean_model(name: &str) -> Result<AsymptoticModel> {
    let model = match name {
        "log_phi" => AsymptoticModel::new(
            "additive_mean:log_phi",
            "Σ ln φ(m) = n ln n + O(n)",
            |n| Ok(n as f64 * (n as f64).ln()),
            |n| Ok(n as f64),
        )
        .with_floor(2),
        "omega" | "big_omega" => AsymptoticModel::new(
            format!("additive_mean:{name}"),
            "n ln ln n + O(n)",
            |n| Ok(n as f64 * ln_ln(n)),
            |n| Ok(n as f64),
        )
        .with_floor(LN_LN_FLOOR),
        other => return Err(Error::UnknownModel(format!("additive_mean:{other}"))),
    };
    Ok(model.with_claimed_exponent(1.0))
}

/// `Σ m^k = n^{k+1}/(k+1) + O(n^k)`.
pub fn power_sum_model(k: f64) -> Result<AsymptoticModel> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidParameter(format!("power sum needs k > 0, got {k}")));
    }
    Ok(AsymptoticModel::new(
        format!("power_sum:{k}"),
        "Σ m^k = n^{k+1}/(k+1) + O(n^k)",
        move |n| Ok((n as f64).powf(k + 1.0) / (k + 1.0)),
        move |n| Ok((n as f64).powf(k)),
    )
    .with_claimed_exponent(k))
}

/// `S(n) = d·n + o(n)`.
pub fn density_limit_model(d_star: f64) -> Result<AsymptoticModel> {
    if !d_star.is_finite() {
        return Err(Error::InvalidParameter(format!("density must be finite, got {d_star}")));
    }
    Ok(AsymptoticModel::new(
        format!("density:{d_star}"),
        "S(n) = d·n + o(n)",
        move |n| Ok(d_star * n as f64),
        |n| Ok(n as f64),
    )
    .with_claimed_exponent(1.0)
    .with_strict_decay())
}

fn check_unit_bound(spec: &FunctionSpec, p: u64, v: u32, value: f64) -> Result<()> {
    if value.abs() > 1.0 {
        return Err(Error::Precondition(format!(
            "{}: |g({p}^{v})| = {} exceeds 1",
            spec.name(),
            value.abs()
        )));
    }
    Ok(())
}

fn require_multiplicative(spec: &FunctionSpec) -> Result<()> {
    if !spec.kind().is_multiplicative() {
        return Err(Error::WrongKind {
            function: spec.name().to_string(),
            reason: "mean-value products need a multiplicative function".into(),
        });
    }
    Ok(())
}

/// Euler factor `(1 − 1/p) Σ_{v≥0} g(p^v)/p^v`, written as
/// `1 + Σ_{v=1}^{V} (g(p^v) − g(p^{v−1}))/p^v`. The rewritten sum is exact
/// whenever `g(p^v)` is constant for `v ≥ V`, so `g ≡ 1` gives exactly 1.
fn wirsing_factor(spec: &FunctionSpec, p: u64, power_bound: u32) -> Result<f64> {
    let inv = 1.0 / p as f64;
    let mut x = 1.0;
    let mut prev = 1.0;
    let mut acc = 1.0;
    for v in 1..=power_bound {
        let g = spec.at_prime_power(p, v)?;
        check_unit_bound(spec, p, v, g)?;
        x *= inv;
        if x == 0.0 {
            break;
        }
        acc += (g - prev) * x;
        prev = g;
    }
    Ok(acc)
}

/// Partial sums of `(1 − g(p))/p` at [`DIVERGENCE_BOUNDS`] and the verdict:
/// divergent when the last increment exceeds half the matching increment of
/// `ln ln P`.
#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceProfile {
    pub partial_sums: Vec<(u64, f64)>,
    pub diverged: bool,
}

pub fn divergence_profile(spec: &FunctionSpec) -> Result<DivergenceProfile> {
    let top = *DIVERGENCE_BOUNDS.last().unwrap();
    let mut acc = CompensatedSum::new();
    let mut partial_sums = Vec::new();
    let mut bounds = DIVERGENCE_BOUNDS.iter().peekable();
    for p in primes_up_to(top) {
        while let Some(&&b) = bounds.peek() {
            if p > b {
                partial_sums.push((b, acc.value()));
                bounds.next();
            } else {
                break;
            }
        }
        let g = spec.at_prime_power(p, 1)?;
        acc.add((1.0 - g) / p as f64);
    }
    for &b in bounds {
        partial_sums.push((b, acc.value()));
    }
    let n = partial_sums.len();
    let (p0, s0) = partial_sums[n - 2];
    let (p1, s1) = partial_sums[n - 1];
    let diverged = s1 - s0 > 0.5 * (ln_ln(p1) - ln_ln(p0));
    Ok(DivergenceProfile {
        partial_sums,
        diverged,
    })
}

/// Truncated mean-value product for a multiplicative `|g| ≤ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct WirsingMean {
    /// The limit of `S(n)/n`: the truncated product, or 0 when divergent.
    pub limit: f64,
    pub diverged: bool,
    /// The truncated product itself, reported even when divergent.
    pub truncated_product: f64,
    /// `Σ |1 − factor(p)|` over the last decade of primes below the bound.
    pub prime_tail_estimate: f64,
    /// Bound on each factor's neglected powers, `2·2^{−V}`.
    pub power_tail_bound: f64,
    pub profile: DivergenceProfile,
}

pub fn wirsing_mean_value(spec: &FunctionSpec, prime_bound: u64, power_bound: u32) -> Result<WirsingMean> {
    require_multiplicative(spec)?;
    if !spec.bounded_by_one() {
        return Err(Error::Precondition(format!(
            "{}: range hint must certify |g| ≤ 1",
            spec.name()
        )));
    }
    if prime_bound < 1_000 || power_bound < 20 {
        return Err(Error::InvalidParameter(format!(
            "need prime_bound ≥ 1000 and power_bound ≥ 20, got {prime_bound} and {power_bound}"
        )));
    }
    let mut product = 1.0;
    let mut tail = CompensatedSum::new();
    for p in primes_up_to(prime_bound) {
        let f = wirsing_factor(spec, p, power_bound)?;
        product *= f;
        if p > prime_bound / 10 {
            tail.add((1.0 - f).abs());
        }
    }
    let profile = divergence_profile(spec)?;
    Ok(WirsingMean {
        limit: if profile.diverged { 0.0 } else { product },
        diverged: profile.diverged,
        truncated_product: product,
        prime_tail_estimate: tail.value(),
        power_tail_bound: 2f64.powi(1 - power_bound as i32),
        profile,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DelangeCondition {
    /// `Σ_{p ≤ prime_bound} (1 − g(p))/p`.
    pub partial_sum: f64,
    pub converged: bool,
    pub profile: DivergenceProfile,
}

pub fn delange_condition(spec: &FunctionSpec, prime_bound: u64) -> Result<DelangeCondition> {
    require_multiplicative(spec)?;
    let mut acc = CompensatedSum::new();
    for p in primes_up_to(prime_bound) {
        let g = spec.at_prime_power(p, 1)?;
        check_unit_bound(spec, p, 1, g)?;
        acc.add((1.0 - g) / p as f64);
    }
    let profile = divergence_profile(spec)?;
    Ok(DelangeCondition {
        partial_sum: acc.value(),
        converged: !profile.diverged,
        profile,
    })
}

/// Euler factor `(1 − 1/p)^κ (1 + Σ_{α≥1} g(p^α)/p^α)`; the power series is
/// completed beyond `V` by holding `g(p^α) = g(p^V)`.
fn kubilius_factor(spec: &FunctionSpec, kappa: f64, p: u64, power_bound: u32) -> Result<f64> {
    let inv = 1.0 / p as f64;
    let mut x = 1.0;
    let mut series = 1.0;
    let mut last = 1.0;
    for a in 1..=power_bound {
        let g = spec.at_prime_power(p, a)?;
        check_unit_bound(spec, p, a, g)?;
        x *= inv;
        series += g * x;
        last = g;
    }
    series += last * x / (p as f64 - 1.0);
    Ok((1.0 - inv).powf(kappa) * series)
}

/// `n (ln n)^{κ−1}/Γ(κ) ∏_p (1 − 1/p)^κ (1 + Σ g(p^α)/p^α)`, truncated at
/// `prime_bound` and `power_bound`. Zero when `κ ∈ {0, −1}`.
pub fn kubilius_main_term(
    spec: &FunctionSpec,
    kappa: f64,
    n: u64,
    prime_bound: u64,
    power_bound: u32,
) -> Result<f64> {
    kubilius_product(spec, kappa, prime_bound, power_bound).map(|c| kubilius_scale(kappa, n, c))?
}

fn kubilius_scale(kappa: f64, n: u64, product: f64) -> Result<f64> {
    if n < 20 {
        return Err(Error::Precondition(format!("Kubilius main term needs n ≥ 20, got {n}")));
    }
    let r = recip_gamma(kappa);
    if r == 0.0 {
        return Ok(0.0);
    }
    let nf = n as f64;
    Ok(nf * nf.ln().powf(kappa - 1.0) * r * product)
}

fn kubilius_product(spec: &FunctionSpec, kappa: f64, prime_bound: u64, power_bound: u32) -> Result<f64> {
    require_multiplicative(spec)?;
    if !(kappa.abs() <= 1.0) {
        return Err(Error::InvalidParameter(format!("|κ| must not exceed 1, got {kappa}")));
    }
    if recip_gamma(kappa) == 0.0 {
        return Ok(0.0);
    }
    let mut product = 1.0;
    for p in primes_up_to(prime_bound) {
        product *= kubilius_factor(spec, kappa, p, power_bound)?;
    }
    Ok(product)
}

/// A main term with its envelope, plus notes such as a derivative fallback.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub main: f64,
    pub envelope: f64,
    pub warnings: Vec<String>,
}

const MONOTONE_SAMPLES: usize = 64;

fn log_samples(n: u64) -> Vec<f64> {
    let top = (n as f64).ln();
    (0..MONOTONE_SAMPLES)
        .map(|i| (top * i as f64 / (MONOTONE_SAMPLES - 1) as f64).exp())
        .collect()
}

fn sampled(f: &FunctionSpec, n: u64) -> Result<Vec<f64>> {
    log_samples(n).into_iter().map(|t| f.evaluate_real(t)).collect()
}

/// `∫_1^n f(t) dt` for a strictly decreasing, positive `f`; envelope 1.
pub fn euler_maclaurin_decreasing(f: &FunctionSpec, n: u64, q: &QuadratureConfig) -> Result<Estimate> {
    if n > 1 {
        let ys = sampled(f, n)?;
        if !ys.windows(2).all(|w| w[1] < w[0]) || ys.iter().any(|&y| y <= 0.0) {
            return Err(Error::Precondition(format!(
                "{} is not strictly decreasing and positive on [1, {n}]",
                f.name()
            )));
        }
    }
    let main = integrate(|t| f.evaluate_real(t).unwrap_or(f64::NAN), 1.0, n as f64, q)?;
    Ok(Estimate {
        main,
        envelope: 1.0,
        warnings: Vec::new(),
    })
}

/// `∫_1^n f(t) dt` for a non-decreasing `f`; envelope `f(n)`.
pub fn euler_maclaurin_nondecreasing(f: &FunctionSpec, n: u64, q: &QuadratureConfig) -> Result<Estimate> {
    let ys = sampled(f, n.max(1))?;
    if !ys.windows(2).all(|w| w[1] >= w[0]) {
        return Err(Error::Precondition(format!(
            "{} is not non-decreasing on [1, {n}]",
            f.name()
        )));
    }
    let main = integrate(|t| f.evaluate_real(t).unwrap_or(f64::NAN), 1.0, n as f64, q)?;
    Ok(Estimate {
        main,
        envelope: f.evaluate_real(n as f64)?,
        warnings: Vec::new(),
    })
}

const FINITE_DIFFERENCE_REL_TOL: f64 = 1e-6;

fn finite_difference(f: &FunctionSpec) -> PointwiseRule {
    let f = f.clone();
    Arc::new(move |t: f64| {
        let h = 1e-6f64.max(1e-8 * t);
        let hi = f.evaluate_real(t + h).unwrap_or(f64::NAN);
        let lo = f.evaluate_real(t - h).unwrap_or(f64::NAN);
        (hi - lo) / (2.0 * h)
    })
}

/// Prime-argument sum by partial summation against `π(t) ≈ t/ln t`:
/// main `n f(n)/ln n − ∫_2^n t f′(t)/ln t dt`, envelope
/// `n|f(n)|/ln² n + ∫_2^n t|f′(t)|/ln² t dt`.
///
/// The derivative is taken from `f_prime`, then from the spec; failing both,
/// a central difference is used and a warning attached.
pub fn abel_prime_sum_estimate(
    f: &FunctionSpec,
    f_prime: Option<PointwiseRule>,
    n: u64,
    q: &QuadratureConfig,
) -> Result<Estimate> {
    if n < 3 {
        return Err(Error::Precondition(format!("prime-sum estimate needs n ≥ 3, got {n}")));
    }
    let mut warnings = Vec::new();
    let mut q = *q;
    let df = match f_prime.or_else(|| f.derivative().cloned()) {
        Some(d) => d,
        None => {
            warnings.push(format!("{}: derivative by central differences", f.name()));
            // difference quotients carry ~1e-7 relative noise
            q.rel_tol = q.rel_tol.max(FINITE_DIFFERENCE_REL_TOL);
            finite_difference(f)
        }
    };
    let q = &q;
    let nf = n as f64;
    let ln_n = nf.ln();
    let fn_ = f.evaluate_real(nf)?;
    let main_integral = integrate(|t| t * df(t) / t.ln(), 2.0, nf, q)?;
    let env_integral = integrate(|t| t * df(t).abs() / (t.ln() * t.ln()), 2.0, nf, q)?;
    Ok(Estimate {
        main: nf * fn_ / ln_n - main_integral,
        envelope: nf * fn_.abs() / (ln_n * ln_n) + env_integral,
        warnings,
    })
}

/// `exp(E[f,n])` with `E[f,n] = Σ_{p≤n} f(p)/p` over the strongly additive
/// shadow of `f = ln g`: the central prediction for the mean of `g`.
pub fn normal_order_mean_model(additive_log_spec: &FunctionSpec, n: u64) -> Result<f64> {
    if n < 3 {
        return Err(Error::Precondition(format!("normal-order prediction needs n ≥ 3, got {n}")));
    }
    Ok(strongly_additive_mean(additive_log_spec, n)?.exp())
}

/// Parameters for models that need truncation bounds or κ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub prime_bound: u64,
    pub power_bound: u32,
    pub kappa: f64,
    /// Largest `n` the model will be asked about (for prime tables).
    pub n_max: u64,
    pub quadrature: QuadratureConfig,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            prime_bound: 1_000_000,
            power_bound: 40,
            kappa: 1.0,
            n_max: 10_000_000,
            quadrature: QuadratureConfig::default(),
        }
    }
}

/// Names accepted by [`build_model`], with their parameter syntax.
pub const MODEL_NAMES: &[(&str, &str)] = &[
    ("additive_mean:<log_phi|omega|big_omega>", "n ln n or n ln ln n, envelope n"),
    ("power_sum:<k>", "n^{k+1}/(k+1), envelope n^k"),
    ("density:<d>", "d·n, envelope n, residual/n → 0"),
    ("wirsing", "n·∏(1−1/p)Σg(p^v)/p^v, envelope n, residual/n → 0"),
    ("delange", "n·∏_{p≤n}(1−1/p)Σg(p^v)/p^v, envelope n, residual/n → 0"),
    ("kubilius[:<kappa>]", "Kubilius main term, envelope n√(ln ln n/ln n)"),
    ("euler_maclaurin", "∫_1^n f, envelope 1 (decreasing f) or f(n)"),
    ("abel", "partial summation over primes, for prime sums"),
    ("prime_count", "n/ln n, envelope n/ln² n + …"),
    ("theta", "n, envelope n/ln n"),
    ("normal_order", "n·exp(Σ_{p≤n} ln g(p)/p), envelope factor e^{(ln ln n)^0.6}"),
];

/// Builds a model from its command-line name. `function` is the summand's
/// function when the model depends on it.
pub fn build_model(name: &str, function: Option<&FunctionSpec>, params: &ModelParams) -> Result<AsymptoticModel> {
    let (head, arg) = match name.split_once(':') {
        Some((h, a)) => (h, Some(a)),
        None => (name, None),
    };
    let need_fn = || {
        function
            .cloned()
            .ok_or_else(|| Error::InvalidParameter(format!("model `{head}` needs a function")))
    };
    let number = |a: Option<&str>| -> Result<f64> {
        a.and_then(|s| s.parse::<f64>().ok())
            .ok_or_else(|| Error::InvalidParameter(format!("model `{name}` needs a numeric parameter")))
    };
    let q = params.quadrature;
    match head {
        "additive_mean" => additive_mean_model(arg.unwrap_or_default()),
        "power_sum" => power_sum_model(number(arg)?),
        "density" => density_limit_model(number(arg)?),
        "wirsing" => {
            let g = need_fn()?;
            let w = wirsing_mean_value(&g, params.prime_bound, params.power_bound)?;
            let d = w.limit;
            Ok(AsymptoticModel::new(
                "wirsing",
                "S(n) = n·∏_p (1−1/p) Σ g(p^v)/p^v + o(n)",
                move |n| Ok(d * n as f64),
                |n| Ok(n as f64),
            )
            .with_claimed_exponent(1.0)
            .with_strict_decay())
        }
        "delange" => {
            let g = need_fn()?;
            require_multiplicative(&g)?;
            let primes = primes_up_to(params.n_max);
            let mut prefix = Vec::with_capacity(primes.len());
            let mut product = 1.0;
            for &p in &primes {
                product *= wirsing_factor(&g, p, params.power_bound)?;
                prefix.push(product);
            }
            let bound = params.n_max;
            Ok(AsymptoticModel::new(
                "delange",
                "S(n) = n·∏_{p≤n} (1−1/p) Σ g(p^v)/p^v + o(n)",
                move |n| {
                    if n > bound {
                        return Err(Error::BoundExceedsCap { requested: n, cap: bound });
                    }
                    let k = primes.partition_point(|&p| p <= n);
                    Ok(n as f64 * if k == 0 { 1.0 } else { prefix[k - 1] })
                },
                |n| Ok(n as f64),
            )
            .with_claimed_exponent(1.0)
            .with_strict_decay())
        }
        "kubilius" => {
            let g = need_fn()?;
            let kappa = if arg.is_some() { number(arg)? } else { params.kappa };
            let c = kubilius_product(&g, kappa, params.prime_bound, params.power_bound)?;
            Ok(AsymptoticModel::new(
                format!("kubilius:{kappa}"),
                "S(n) = n(ln n)^{κ−1}/Γ(κ)·∏_p(1−1/p)^κ(1+Σ g(p^α)/p^α) + O(n√(ln ln n/ln n))",
                move |n| kubilius_scale(kappa, n, c),
                |n| {
                    let nf = n as f64;
                    Ok(nf * (nf.ln().ln() / nf.ln()).sqrt())
                },
            )
            .with_claimed_exponent(1.0)
            .with_floor(20))
        }
        "euler_maclaurin" => {
            let f = need_fn()?;
            if f.kind() != Kind::Pointwise {
                return Err(Error::WrongKind {
                    function: f.name().to_string(),
                    reason: "Euler–Maclaurin needs a pointwise function".into(),
                });
            }
            let decreasing = euler_maclaurin_decreasing(&f, params.n_max.max(2), &q).is_ok();
            let (f1, f2) = (f.clone(), f);
            let estimate = move |n: u64, which: &FunctionSpec| {
                if decreasing {
                    euler_maclaurin_decreasing(which, n, &q)
                } else {
                    euler_maclaurin_nondecreasing(which, n, &q)
                }
            };
            let e1 = estimate.clone();
            let model = AsymptoticModel::new(
                "euler_maclaurin",
                if decreasing {
                    "S(n) = ∫_1^n f(t) dt + O(1)"
                } else {
                    "S(n) = ∫_1^n f(t) dt + O(f(n))"
                },
                move |n| e1(n, &f1).map(|e| e.main),
                move |n| estimate(n, &f2).map(|e| e.envelope),
            );
            Ok(if decreasing { model.with_claimed_exponent(0.0) } else { model })
        }
        "abel" => {
            let f = need_fn()?;
            Ok(abel_model("abel", f, q))
        }
        "prime_count" => Ok(abel_model("prime_count", builtins::constant(1.0), q)),
        "theta" => Ok(AsymptoticModel::new(
            "theta",
            "θ(n) = n + O(n/ln n)",
            |n| Ok(n as f64),
            |n| Ok(n as f64 / (n as f64).ln()),
        )
        .with_floor(2)
        .with_claimed_exponent(1.0)),
        "normal_order" => {
            let g = need_fn()?;
            let f = g.log_of()?;
            let sums = Arc::new(PrimeReciprocalSums::new(&f, params.n_max)?);
            let bound = params.n_max;
            let s2 = sums.clone();
            let main = move |n: u64, sums: &PrimeReciprocalSums| {
                if n > bound {
                    return Err(Error::BoundExceedsCap { requested: n, cap: bound });
                }
                Ok(n as f64 * sums.at(n).exp())
            };
            let m2 = main.clone();
            Ok(AsymptoticModel::new(
                "normal_order",
                "(1/n)Σ g(m) = e^{E[f,n] + O(b(n)√D[f,n])}(1+o(1))",
                move |n| main(n, &sums),
                move |n| {
                    let widen = ln_ln(n).powf(NORMAL_ORDER_ENVELOPE_POWER).exp() - 1.0;
                    Ok(m2(n, &s2)? * widen)
                },
            )
            .with_claimed_exponent(1.0)
            .with_floor(LN_LN_FLOOR))
        }
        _ => Err(Error::UnknownModel(name.to_string())),
    }
}

fn abel_model(name: &str, f: FunctionSpec, q: QuadratureConfig) -> AsymptoticModel {
    let f2 = f.clone();
    AsymptoticModel::new(
        name,
        "Σ_{p≤n} f(p) = n f(n)/ln n − ∫_2^n t f′(t)/ln t dt + O(n|f(n)|/ln² n + ∫_2^n t|f′(t)|/ln² t dt)",
        move |n| abel_prime_sum_estimate(&f, None, n, &q).map(|e| e.main),
        move |n| abel_prime_sum_estimate(&f2, None, n, &q).map(|e| e.envelope),
    )
    .with_floor(3)
}

/// Resolves the function a model needs from a registry name, ignoring
/// special summands that have no [`FunctionSpec`].
pub fn model_function(name: &str) -> Option<FunctionSpec> {
    Registry.get(name).ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn strongly_additive_mean_examples() {
        let omega = builtins::omega();
        let want = 0.5 + 1.0 / 3.0 + 0.2 + 1.0 / 7.0;
        assert!(close(strongly_additive_mean(&omega, 10).unwrap(), want, 1e-15));
        let lp = builtins::log_phi();
        let want = 2f64.ln() / 3.0 + 4f64.ln() / 5.0 + 6f64.ln() / 7.0;
        assert!(close(strongly_additive_mean(&lp, 10).unwrap(), want, 1e-15));
        assert!(close(want, 0.7643, 1e-4));
        assert_eq!(strongly_additive_mean(&omega, 1).unwrap(), 0.0);
        assert!(strongly_additive_mean(&builtins::mobius(), 10).is_err());
    }

    #[test]
    fn additive_models() {
        let m = additive_mean_model("omega").unwrap();
        assert!(close(m.main(15).unwrap(), 15.0 * 15f64.ln().ln(), 1e-12));
        assert!(close(m.main(15).unwrap(), 14.94, 0.01));
        let m = additive_mean_model("log_phi").unwrap();
        assert!(close(m.main(10).unwrap(), 23.026, 1e-3));
        let m = additive_mean_model("big_omega").unwrap();
        assert!(m.main(3).unwrap().is_finite() && m.main(3).unwrap() > 0.0);
        assert!(matches!(m.main(2), Err(Error::BelowModelFloor { .. })));
        assert_eq!(m.claimed_exponent(), Some(1.0));
        assert!(additive_mean_model("mobius").is_err());
    }

    #[test]
    fn power_and_density_models() {
        let m = power_sum_model(1.0).unwrap();
        assert_eq!(m.main(100).unwrap(), 5000.0);
        assert_eq!(m.envelope(100).unwrap(), 100.0);
        let m = power_sum_model(2.0).unwrap();
        assert!(close(m.main(10).unwrap(), 333.333_333_333, 1e-6));
        let m = power_sum_model(3.0).unwrap();
        assert_eq!((m.main(1).unwrap(), m.envelope(1).unwrap()), (0.25, 1.0));
        assert!(power_sum_model(0.0).is_err());
        let d = density_limit_model(1.0).unwrap();
        assert!(d.strict_decay());
        assert_eq!(d.main(77).unwrap(), 77.0);
        assert!(density_limit_model(f64::NAN).is_err());
    }

    #[test]
    fn wirsing_examples() {
        for bound in [1_000, 10_000, 100_000] {
            let w = wirsing_mean_value(&builtins::unit(), bound, 20).unwrap();
            assert!(close(w.limit, 1.0, 1e-12));
            assert!(!w.diverged);
        }
        let w = wirsing_mean_value(&builtins::mobius(), 10_000, 20).unwrap();
        assert!(w.diverged);
        assert_eq!(w.limit, 0.0);
        let w = wirsing_mean_value(&builtins::squarefree(), 100_000, 20).unwrap();
        assert!(!w.diverged);
        let six_over_pi2 = 6.0 / std::f64::consts::PI.powi(2);
        // independent route: ∏ (1 − 1/p²) over the same primes
        let direct: f64 = primes_up_to(100_000).iter().map(|&p| 1.0 - 1.0 / (p * p) as f64).product();
        assert!(close(w.limit, direct, 1e-13));
        assert!(close(w.limit, six_over_pi2, 1e-5));
        assert!(w.prime_tail_estimate > 0.0 && w.prime_tail_estimate < 1e-4);
    }

    #[test]
    fn wirsing_preconditions() {
        assert!(wirsing_mean_value(&builtins::g_star(), 1_000, 20).is_err());
        assert!(wirsing_mean_value(&builtins::unit(), 999, 20).is_err());
        assert!(wirsing_mean_value(&builtins::unit(), 1_000, 19).is_err());
        let lying = FunctionSpec::multiplicative("lying", |_, a| a as f64).with_range_hint(-1.0, 1.0);
        assert!(matches!(
            wirsing_mean_value(&lying, 1_000, 20),
            Err(Error::Precondition(_))
        ));
        assert!(wirsing_mean_value(&builtins::omega(), 1_000, 20).is_err());
    }

    #[test]
    fn delange_examples() {
        let d = delange_condition(&builtins::unit(), 10_000).unwrap();
        assert_eq!(d.partial_sum, 0.0);
        assert!(d.converged);
        let d = delange_condition(&builtins::mobius(), 100_000).unwrap();
        let two_recip: f64 = primes_up_to(100_000).iter().map(|&p| 2.0 / p as f64).sum();
        assert!(close(d.partial_sum, two_recip, 1e-12));
        assert!(!d.converged);
        let near_one = FunctionSpec::multiplicative("near_one", |p, _| 1.0 - 1.0 / p as f64)
            .with_range_hint(0.0, 1.0);
        let d = delange_condition(&near_one, 100_000).unwrap();
        // Σ 1/p² over all primes is 0.452247420041065...
        assert!(d.partial_sum < 0.452_247_420_041_066);
        assert!(d.partial_sum > 0.452);
        assert!(d.converged);
    }

    #[test]
    fn kubilius_examples() {
        let v = kubilius_main_term(&builtins::unit(), 1.0, 10_000, 10_000, 40).unwrap();
        assert!(close(v / 10_000.0, 1.0, 1e-9));
        for kappa in [0.0, -1.0] {
            assert_eq!(kubilius_main_term(&builtins::mobius(), kappa, 1000, 1000, 20).unwrap(), 0.0);
        }
        assert!(kubilius_main_term(&builtins::unit(), 1.5, 100, 1000, 20).is_err());
        assert!(kubilius_main_term(&builtins::unit(), 1.0, 19, 1000, 20).is_err());
    }

    #[test]
    fn kubilius_matches_wirsing_at_kappa_one() {
        let g = builtins::squarefree();
        let n = 1_000_000;
        let k = kubilius_main_term(&g, 1.0, n, 100_000, 40).unwrap() / n as f64;
        let w = wirsing_mean_value(&g, 100_000, 40).unwrap().limit;
        assert!(close(k, w, 1e-12), "{k} vs {w}");
    }

    #[test]
    fn euler_maclaurin_examples() {
        let q = QuadratureConfig::default();
        let e = euler_maclaurin_decreasing(&builtins::reciprocal(), 1000, &q).unwrap();
        assert!(close(e.main, 1000f64.ln(), 1e-8));
        assert_eq!(e.envelope, 1.0);
        let inv_sq = FunctionSpec::pointwise("inv_sq", |t| 1.0 / (t * t));
        assert!(close(euler_maclaurin_decreasing(&inv_sq, 1000, &q).unwrap().main, 0.999, 1e-9));
        assert_eq!(euler_maclaurin_decreasing(&builtins::reciprocal(), 1, &q).unwrap().main, 0.0);
        assert!(euler_maclaurin_decreasing(&builtins::log(), 100, &q).is_err());

        let sq = builtins::power_k(2.0).unwrap();
        let e = euler_maclaurin_nondecreasing(&sq, 10, &q).unwrap();
        assert!(close(e.main, 333.0, 1e-7));
        assert_eq!(e.envelope, 100.0);
        assert!((385.0 - e.main).abs() <= e.envelope);
        let lin = builtins::power_k(1.0).unwrap();
        let e = euler_maclaurin_nondecreasing(&lin, 10, &q).unwrap();
        assert!(close(e.main, 49.5, 1e-9));
        assert!((55.0 - e.main).abs() <= e.envelope);
        let e = euler_maclaurin_nondecreasing(&builtins::constant(1.0), 5, &q).unwrap();
        assert!(close(e.main, 4.0, 1e-12));
        assert_eq!(e.envelope, 1.0);
        assert!(euler_maclaurin_nondecreasing(&builtins::reciprocal(), 10, &q).is_err());
    }

    #[test]
    fn abel_examples() {
        let q = QuadratureConfig::default();
        let c = builtins::constant(2.5);
        let e = abel_prime_sum_estimate(&c, None, 1000, &q).unwrap();
        assert!(close(e.main, 2.5 * 1000.0 / 1000f64.ln(), 1e-9));
        let e = abel_prime_sum_estimate(&builtins::log(), None, 3, &q).unwrap();
        assert!(e.main.is_finite() && e.envelope > 0.0);
        assert!(e.warnings.is_empty());
        assert!(abel_prime_sum_estimate(&builtins::log(), None, 2, &q).is_err());
    }

    #[test]
    fn abel_finite_difference_fallback() {
        let q = QuadratureConfig::default();
        let bare = FunctionSpec::pointwise("bare_log", f64::ln);
        let fd = abel_prime_sum_estimate(&bare, None, 100_000, &q).unwrap();
        let exact = abel_prime_sum_estimate(&builtins::log(), None, 100_000, &q).unwrap();
        assert_eq!(fd.warnings.len(), 1);
        assert!(close(fd.main, exact.main, 1e-5 * exact.main));
        assert!(close(fd.envelope, exact.envelope, 1e-5 * exact.envelope));
        let explicit: PointwiseRule = Arc::new(|t: f64| 1.0 / t);
        let e = abel_prime_sum_estimate(&bare, Some(explicit), 100_000, &q).unwrap();
        assert!(e.warnings.is_empty());
        assert_eq!(e.main, exact.main);
    }

    #[test]
    fn normal_order_examples() {
        let unit_log = builtins::unit().log_of().unwrap();
        assert_eq!(normal_order_mean_model(&unit_log, 100).unwrap(), 1.0);
        let e_omega = FunctionSpec::strongly_multiplicative("e_omega", |_| std::f64::consts::E);
        let f = e_omega.log_of().unwrap();
        let v = normal_order_mean_model(&f, 10).unwrap();
        assert!(close(v, (0.5 + 1.0 / 3.0 + 0.2 + 1.0 / 7.0f64).exp(), 1e-14));
        assert!(close(v, 3.2420, 1e-4));
    }

    #[test]
    fn g_star_prediction_over_ln_n_settles() {
        let f = builtins::g_star().log_of().unwrap();
        let sums = PrimeReciprocalSums::new(&f, 10_000_000).unwrap();
        let ratios: Vec<f64> = (12..=28)
            .map(|i| 10f64.powf(i as f64 / 4.0).round() as u64)
            .map(|n| sums.at(n).exp() / (n as f64).ln())
            .collect();
        let last5 = &ratios[ratios.len() - 5..];
        let spread = last5.iter().cloned().fold(f64::MIN, f64::max) - last5.iter().cloned().fold(f64::MAX, f64::min);
        assert!(spread < 0.02 * last5[4], "{ratios:?}");
    }

    #[test]
    fn envelopes_are_positive() {
        let p = ModelParams {
            prime_bound: 1_000,
            power_bound: 20,
            n_max: 100_000,
            ..Default::default()
        };
        let cases = [
            ("additive_mean:omega", None),
            ("additive_mean:log_phi", None),
            ("power_sum:2", None),
            ("density:0.5", None),
            ("wirsing", Some(builtins::squarefree())),
            ("delange", Some(builtins::squarefree())),
            ("kubilius:0.5", Some(builtins::squarefree())),
            ("euler_maclaurin", Some(builtins::reciprocal())),
            ("euler_maclaurin", Some(builtins::power_k(1.5).unwrap())),
            ("abel", Some(builtins::log())),
            ("prime_count", None),
            ("theta", None),
            ("normal_order", Some(builtins::g_star())),
        ];
        for (name, f) in cases {
            let m = build_model(name, f.as_ref(), &p).unwrap();
            for n in [m.n_floor().max(20), 1000, 100_000] {
                let env = m.envelope(n).unwrap();
                assert!(env > 0.0 && env.is_finite(), "{name} at {n}: {env}");
                assert!(m.main(n).unwrap().is_finite(), "{name} at {n}");
            }
        }
        assert!(matches!(build_model("nope", None, &p), Err(Error::UnknownModel(_))));
        assert!(build_model("wirsing", None, &p).is_err());
        assert!(build_model("density:x", None, &p).is_err());
    }
}
