//! Arithmetic functions defined by prime-power rules, and the built-in registry.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::sieve::{Factorization, PrimePower};

pub type PrimePowerRule = Arc<dyn Fn(u64, u32) -> f64 + Send + Sync>;
pub type PointwiseRule = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind {
    Additive,
    StronglyAdditive,
    Multiplicative,
    StronglyMultiplicative,
    Pointwise,
}

impl Kind {
    pub fn is_additive(self) -> bool {
        matches!(self, Kind::Additive | Kind::StronglyAdditive)
    }

    pub fn is_multiplicative(self) -> bool {
        matches!(self, Kind::Multiplicative | Kind::StronglyMultiplicative)
    }

    fn is_strong(self) -> bool {
        matches!(self, Kind::StronglyAdditive | Kind::StronglyMultiplicative)
    }
}

/// Integer-valued built-ins whose values are read straight off a sieve
/// block and summed exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExactValues {
    Omega,
    BigOmega,
    Mobius,
    Unit,
    Squarefree,
}

#[derive(Clone)]
pub enum Rule {
    PrimePower(PrimePowerRule),
    Pointwise(PointwiseRule),
}

/// A named arithmetic function.
///
/// Immutable once built; cloning shares the underlying rules.
#[derive(Clone)]
pub struct FunctionSpec {
    name: String,
    kind: Kind,
    rule: Rule,
    derivative: Option<PointwiseRule>,
    range_hint: Option<(f64, f64)>,
    exact: Option<ExactValues>,
}

impl fmt::Debug for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FunctionSpec")
            .field("name", &self.name)
            .field("kind", &self.kind)
            .field("range_hint", &self.range_hint)
            .field("exact", &self.exact)
            .finish_non_exhaustive()
    }
}

impl FunctionSpec {
    /// General constructor; rejects a rule that does not fit the kind.
    pub fn new(name: impl Into<String>, kind: Kind, rule: Rule) -> Result<Self> {
        let name = name.into();
        let fits = match rule {
            Rule::Pointwise(_) => kind == Kind::Pointwise,
            Rule::PrimePower(_) => kind != Kind::Pointwise,
        };
        if !fits {
            return Err(Error::WrongKind {
                function: name,
                reason: format!("{kind:?} needs a {} rule", rule_label(kind)),
            });
        }
        Ok(Self {
            name,
            kind,
            rule,
            derivative: None,
            range_hint: None,
            exact: None,
        })
    }

    pub fn additive<F>(name: impl Into<String>, rule: F) -> Self
    where
        F: Fn(u64, u32) -> f64 + Send + Sync + 'static,
    {
        Self::from_prime_power(name, Kind::Additive, Arc::new(rule))
    }

    pub fn multiplicative<F>(name: impl Into<String>, rule: F) -> Self
    where
        F: Fn(u64, u32) -> f64 + Send + Sync + 'static,
    {
        Self::from_prime_power(name, Kind::Multiplicative, Arc::new(rule))
    }

    /// Strongly additive function given by its values on primes.
    pub fn strongly_additive<F>(name: impl Into<String>, on_primes: F) -> Self
    where
        F: Fn(u64) -> f64 + Send + Sync + 'static,
    {
        Self::from_prime_power(
            name,
            Kind::StronglyAdditive,
            Arc::new(move |p, _| on_primes(p)),
        )
    }

    pub fn strongly_multiplicative<F>(name: impl Into<String>, on_primes: F) -> Self
    where
        F: Fn(u64) -> f64 + Send + Sync + 'static,
    {
        Self::from_prime_power(
            name,
            Kind::StronglyMultiplicative,
            Arc::new(move |p, _| on_primes(p)),
        )
    }

    /// Function given directly on the reals; `m` is evaluated as `rule(m as f64)`.
    pub fn pointwise<F>(name: impl Into<String>, rule: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            kind: Kind::Pointwise,
            rule: Rule::Pointwise(Arc::new(rule)),
            derivative: None,
            range_hint: None,
            exact: None,
        }
    }

    fn from_prime_power(name: impl Into<String>, kind: Kind, rule: PrimePowerRule) -> Self {
        Self {
            name: name.into(),
            kind,
            rule: Rule::PrimePower(rule),
            derivative: None,
            range_hint: None,
            exact: None,
        }
    }

    pub fn with_derivative<F>(mut self, derivative: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.derivative = Some(Arc::new(derivative));
        self
    }

    /// Declares `lo ≤ f ≤ hi` everywhere.
    pub fn with_range_hint(mut self, lo: f64, hi: f64) -> Self {
        self.range_hint = Some((lo, hi));
        self
    }

    fn with_exact(mut self, exact: ExactValues) -> Self {
        self.exact = Some(exact);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn rule(&self) -> &Rule {
        &self.rule
    }

    pub fn range_hint(&self) -> Option<(f64, f64)> {
        self.range_hint
    }

    pub fn exact_values(&self) -> Option<ExactValues> {
        self.exact
    }

    pub fn derivative(&self) -> Option<&PointwiseRule> {
        self.derivative.as_ref()
    }

    /// Whether the range hint certifies `|f| ≤ 1`.
    pub fn bounded_by_one(&self) -> bool {
        self.range_hint
            .is_some_and(|(lo, hi)| lo >= -1.0 && hi <= 1.0)
    }

    fn prime_power_rule(&self) -> Result<&PrimePowerRule> {
        match &self.rule {
            Rule::PrimePower(r) => Ok(r),
            Rule::Pointwise(_) => Err(Error::WrongKind {
                function: self.name.clone(),
                reason: "pointwise function has no prime-power rule".into(),
            }),
        }
    }

    /// `f(p^alpha)`, checked finite.
    pub fn at_prime_power(&self, p: u64, alpha: u32) -> Result<f64> {
        let v = (self.prime_power_rule()?)(p, alpha);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::PrimePowerEvaluation {
                function: self.name.clone(),
                p,
                alpha,
                m: None,
            })
        }
    }

    /// Evaluates a prime-power kind on a canonical factor list: sum of the
    /// component values for additive kinds, product for multiplicative ones.
    pub fn evaluate_factors(&self, factors: &[PrimePower]) -> Result<f64> {
        let additive = match self.kind {
            Kind::Pointwise => {
                return Err(Error::WrongKind {
                    function: self.name.clone(),
                    reason: "use evaluate_pointwise for pointwise functions".into(),
                })
            }
            k => k.is_additive(),
        };
        let mut acc = if additive { 0.0 } else { 1.0 };
        for f in factors {
            let v = self.at_prime_power(f.p, f.alpha)?;
            if additive {
                acc += v;
            } else {
                acc *= v;
            }
        }
        Ok(acc)
    }

    pub fn evaluate(&self, fact: &Factorization) -> Result<f64> {
        self.evaluate_factors(fact.factors()).map_err(|e| match e {
            Error::PrimePowerEvaluation {
                function, p, alpha, ..
            } => Error::PrimePowerEvaluation {
                function,
                p,
                alpha,
                m: Some(fact.m()),
            },
            other => other,
        })
    }

    pub fn evaluate_pointwise(&self, m: u64) -> Result<f64> {
        self.evaluate_real(m as f64).map_err(|_| Error::PointwiseEvaluation {
            function: self.name.clone(),
            m,
        })
    }

    /// The real extension of a pointwise function.
    pub fn evaluate_real(&self, t: f64) -> Result<f64> {
        match &self.rule {
            Rule::Pointwise(r) => {
                let v = r(t);
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::PointwiseEvaluation {
                        function: self.name.clone(),
                        m: t as u64,
                    })
                }
            }
            Rule::PrimePower(_) => Err(Error::WrongKind {
                function: self.name.clone(),
                reason: "prime-power function has no real extension".into(),
            }),
        }
    }

    /// The strongly additive function agreeing with `self` on primes.
    pub fn strongly_additive_shadow(&self) -> Result<FunctionSpec> {
        match self.kind {
            Kind::StronglyAdditive => Ok(self.clone()),
            Kind::Additive => {
                let rule = self.prime_power_rule()?.clone();
                Ok(FunctionSpec::strongly_additive(
                    format!("{}_shadow", self.name),
                    move |p| rule(p, 1),
                ))
            }
            other => Err(Error::WrongKind {
                function: self.name.clone(),
                reason: format!("shadow needs an additive function, got {other:?}"),
            }),
        }
    }

    /// `ln ∘ g` for a positive multiplicative `g`; the result is additive
    /// (strongly additive when `g` is strongly multiplicative).
    pub fn log_of(&self) -> Result<FunctionSpec> {
        let rule = self.prime_power_rule()?.clone();
        let kind = match self.kind {
            Kind::Multiplicative => Kind::Additive,
            Kind::StronglyMultiplicative => Kind::StronglyAdditive,
            other => {
                return Err(Error::WrongKind {
                    function: self.name.clone(),
                    reason: format!("log bridge needs a multiplicative function, got {other:?}"),
                })
            }
        };
        Ok(Self::from_prime_power(
            format!("ln_{}", self.name),
            kind,
            Arc::new(move |p, a| rule(p, a).ln()),
        ))
    }

    /// Checks the kind's structural invariant on primes `p ≤ 100`, `α ≤ 5`:
    /// strong kinds must be constant in `α`, and every value must be finite.
    pub fn check_invariants(&self) -> Result<()> {
        if self.kind == Kind::Pointwise {
            return Ok(());
        }
        for p in crate::sieve::primes_up_to(100) {
            let at_p = self.at_prime_power(p, 1)?;
            for alpha in 2..=5 {
                let v = self.at_prime_power(p, alpha)?;
                if self.kind.is_strong() && v != at_p {
                    return Err(Error::WrongKind {
                        function: self.name.clone(),
                        reason: format!(
                            "strong kind but f({p}^{alpha}) = {v} differs from f({p}) = {at_p}"
                        ),
                    });
                }
            }
        }
        Ok(())
    }
}

fn rule_label(kind: Kind) -> &'static str {
    if kind == Kind::Pointwise {
        "pointwise"
    } else {
        "prime-power"
    }
}

/// Built-in functions.
pub mod builtins {
    use super::*;

    pub fn omega() -> FunctionSpec {
        FunctionSpec::strongly_additive("omega", |_| 1.0).with_exact(ExactValues::Omega)
    }

    pub fn big_omega() -> FunctionSpec {
        FunctionSpec::additive("big_omega", |_, a| a as f64).with_exact(ExactValues::BigOmega)
    }

    /// `ln φ(m)`, with `ln φ(p^α) = ln(p−1) + (α−1)·ln p`.
    pub fn log_phi() -> FunctionSpec {
        FunctionSpec::additive("log_phi", |p, a| {
            ((p - 1) as f64).ln() + (a - 1) as f64 * (p as f64).ln()
        })
    }

    pub fn mobius() -> FunctionSpec {
        FunctionSpec::multiplicative("mobius", |_, a| if a == 1 { -1.0 } else { 0.0 })
            .with_range_hint(-1.0, 1.0)
            .with_exact(ExactValues::Mobius)
    }

    pub fn unit() -> FunctionSpec {
        FunctionSpec::multiplicative("unit", |_, _| 1.0)
            .with_range_hint(1.0, 1.0)
            .with_exact(ExactValues::Unit)
    }

    /// Indicator of squarefree integers, `μ²`.
    pub fn squarefree() -> FunctionSpec {
        FunctionSpec::multiplicative("squarefree", |_, a| if a == 1 { 1.0 } else { 0.0 })
            .with_range_hint(0.0, 1.0)
            .with_exact(ExactValues::Squarefree)
    }

    pub fn reciprocal() -> FunctionSpec {
        FunctionSpec::pointwise("reciprocal", |t| 1.0 / t)
            .with_derivative(|t| -1.0 / (t * t))
            .with_range_hint(0.0, 1.0)
    }

    pub fn power_k(k: f64) -> Result<FunctionSpec> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::InvalidParameter(format!("power_k needs k > 0, got {k}")));
        }
        Ok(FunctionSpec::pointwise(format!("power_{k}"), move |t| t.powf(k))
            .with_derivative(move |t| k * t.powf(k - 1.0)))
    }

    pub fn log() -> FunctionSpec {
        FunctionSpec::pointwise("log", f64::ln).with_derivative(|t| 1.0 / t)
    }

    /// Constant function on the reals, for prime-argument sums such as `π(n)`.
    pub fn constant(c: f64) -> FunctionSpec {
        FunctionSpec::pointwise(format!("const_{c}"), move |_| c).with_derivative(|_| 0.0)
    }

    /// `g*(m) = e^{ω(m)} ∏_{p|m} (1 − 1/p)`: strongly multiplicative with
    /// `g*(p) = e·(1 − 1/p)`, so `ln g*` is strongly additive with value
    /// `1 + ln(1 − 1/p)` on primes.
    pub fn g_star() -> FunctionSpec {
        FunctionSpec::strongly_multiplicative("g_star", |p| {
            std::f64::consts::E * (1.0 - 1.0 / p as f64)
        })
    }
}

/// Lookup table from canonical names to built-in functions.
#[derive(Debug, Clone, Copy, Default)]
pub struct Registry;

impl Registry {
    pub const NAMES: &'static [&'static str] = &[
        "omega",
        "big_omega",
        "log_phi",
        "mobius",
        "unit",
        "squarefree",
        "reciprocal",
        "power_k",
        "log",
        "g_star",
    ];

    /// Resolves a name; `power_k` takes its exponent as `power_<k>` or
    /// `power_k:<k>`.
    pub fn get(&self, name: &str) -> Result<FunctionSpec> {
        Ok(match name {
            "omega" => builtins::omega(),
            "big_omega" => builtins::big_omega(),
            "log_phi" => builtins::log_phi(),
            "mobius" => builtins::mobius(),
            "unit" => builtins::unit(),
            "squarefree" => builtins::squarefree(),
            "reciprocal" => builtins::reciprocal(),
            "log" => builtins::log(),
            "g_star" => builtins::g_star(),
            other => {
                let k = other
                    .strip_prefix("power_k:")
                    .or_else(|| other.strip_prefix("power_"))
                    .and_then(|k| k.parse::<f64>().ok())
                    .ok_or_else(|| Error::UnknownFunction(other.to_string()))?;
                builtins::power_k(k)?
            }
        })
    }

    pub fn all(&self) -> Vec<FunctionSpec> {
        Self::NAMES
            .iter()
            .map(|&n| if n == "power_k" { "power_2" } else { n })
            .map(|n| self.get(n).expect("built-in"))
            .collect()
    }
}
