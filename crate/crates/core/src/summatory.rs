//! Exact summatory functions `S(n) = Σ_{m≤n} f(m)` on checkpoint grids.
//!
//! Integer-valued built-ins (ω, Ω, μ, μ², 1, the prime indicator) accumulate
//! in `i64`; everything else accumulates with compensated summation. Values
//! are added one integer at a time in ascending order, so the result does not
//! depend on block size or worker count.

use crate::arith::{builtins, ExactValues, FunctionSpec, Kind, Rule};
use crate::compensated::CompensatedSum;
use crate::engine::Summator;
use crate::error::{Error, Result};
use crate::sieve::{build_block_with_capacity, prime_flags, visit_prime_powers, BasePrimes};

/// What is being summed.
#[derive(Debug, Clone)]
pub enum Summand {
    /// `Σ_{m≤n} f(m)`.
    Function(FunctionSpec),
    /// `Σ_{p≤n} f(p)` for a pointwise `f`.
    PrimeSum(FunctionSpec),
    /// `π(n)`.
    PrimeCount,
}

impl Summand {
    pub fn name(&self) -> String {
        match self {
            Summand::Function(f) => f.name().to_string(),
            Summand::PrimeSum(f) if f.name() == "log" => "theta".to_string(),
            Summand::PrimeSum(f) => format!("prime_sum:{}", f.name()),
            Summand::PrimeCount => "prime_count".to_string(),
        }
    }

    fn is_exact(&self) -> bool {
        match self {
            Summand::Function(f) => f.exact_values().is_some(),
            Summand::PrimeSum(_) => false,
            Summand::PrimeCount => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SeriesValues {
    Exact(Vec<i64>),
    Real(Vec<f64>),
}

impl SeriesValues {
    pub fn len(&self) -> usize {
        match self {
            SeriesValues::Exact(v) => v.len(),
            SeriesValues::Real(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Accumulator state after the last checkpoint; enough to resume a run
/// bit-identically.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AccumulatorState {
    Exact(i64),
    Real(CompensatedSum),
}

impl AccumulatorState {
    fn zero(exact: bool) -> Self {
        if exact {
            AccumulatorState::Exact(0)
        } else {
            AccumulatorState::Real(CompensatedSum::new())
        }
    }
}

/// Exact values of a summatory function at ascending checkpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct SummatorySeries {
    function_name: String,
    grid: Vec<u64>,
    values: SeriesValues,
    end_state: AccumulatorState,
}

impl SummatorySeries {
    /// Assembles a series, checking the grid is strictly increasing and that
    /// values and state agree in type and length.
    pub fn from_parts(
        function_name: impl Into<String>,
        grid: Vec<u64>,
        values: SeriesValues,
        end_state: AccumulatorState,
    ) -> Result<Self> {
        if grid.is_empty() || !is_strictly_increasing(&grid) || grid[0] == 0 {
            return Err(Error::InvalidGrid);
        }
        let same_type = matches!(
            (&values, &end_state),
            (SeriesValues::Exact(_), AccumulatorState::Exact(_))
                | (SeriesValues::Real(_), AccumulatorState::Real(_))
        );
        if values.len() != grid.len() || !same_type {
            return Err(Error::Precondition(
                "series values must match the grid in length and type".into(),
            ));
        }
        Ok(Self {
            function_name: function_name.into(),
            grid,
            values,
            end_state,
        })
    }

    pub fn function_name(&self) -> &str {
        &self.function_name
    }

    pub fn grid(&self) -> &[u64] {
        &self.grid
    }

    pub fn values(&self) -> &SeriesValues {
        &self.values
    }

    pub fn n_max(&self) -> u64 {
        *self.grid.last().expect("non-empty grid")
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn end_state(&self) -> AccumulatorState {
        self.end_state
    }

    pub fn value(&self, i: usize) -> f64 {
        match &self.values {
            SeriesValues::Exact(v) => v[i] as f64,
            SeriesValues::Real(v) => v[i],
        }
    }

    pub fn exact_value(&self, i: usize) -> Option<i64> {
        match &self.values {
            SeriesValues::Exact(v) => Some(v[i]),
            SeriesValues::Real(_) => None,
        }
    }

    pub fn as_f64(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.value(i)).collect()
    }

    /// Mean value `S(n_i)/n_i`.
    pub fn mean_value(&self, i: usize) -> f64 {
        self.value(i) / self.grid[i] as f64
    }

    /// Density `S(n_i)/n_i`; same number as the mean value, named for
    /// indicator-type summands.
    pub fn density(&self, i: usize) -> f64 {
        self.mean_value(i)
    }

    /// The first `len` checkpoints.
    pub fn prefix(&self, len: usize) -> Result<Self> {
        if len == 0 || len > self.len() {
            return Err(Error::InvalidGrid);
        }
        if len == self.len() {
            return Ok(self.clone());
        }
        let values = match &self.values {
            SeriesValues::Exact(v) => SeriesValues::Exact(v[..len].to_vec()),
            SeriesValues::Real(v) => SeriesValues::Real(v[..len].to_vec()),
        };
        let end_state = match values {
            SeriesValues::Exact(ref v) => AccumulatorState::Exact(v[len - 1]),
            // the compensation at an interior checkpoint is not retained
            SeriesValues::Real(ref v) => {
                AccumulatorState::Real(CompensatedSum::from_parts(v[len - 1], 0.0))
            }
        };
        Ok(Self {
            function_name: self.function_name.clone(),
            grid: self.grid[..len].to_vec(),
            values,
            end_state,
        })
    }
}

pub(crate) fn is_strictly_increasing(grid: &[u64]) -> bool {
    grid.windows(2).all(|w| w[0] < w[1])
}

/// Mean and variance of `f(1), …, f(n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanVariance {
    pub mean: f64,
    pub variance: f64,
}

enum BlockValues {
    Exact(Vec<i64>),
    Real(Vec<f64>),
}

fn exact_block(which: ExactValues, lo: u64, hi: u64, base: &BasePrimes) -> Result<Vec<i64>> {
    if which == ExactValues::Unit {
        return Ok(vec![1; (hi - lo) as usize]);
    }
    let block = build_block_with_capacity(lo, hi, base, (hi - lo) as usize)?;
    Ok(match which {
        ExactValues::Omega => block.omega_slice().iter().map(|&x| x as i64).collect(),
        ExactValues::BigOmega => block.big_omega_slice().iter().map(|&x| x as i64).collect(),
        ExactValues::Mobius => block.mu_slice().iter().map(|&x| x as i64).collect(),
        ExactValues::Squarefree => block.mu_slice().iter().map(|&x| (x != 0) as i64).collect(),
        ExactValues::Unit => unreachable!(),
    })
}

/// Values of a prime-power function on `[lo, hi)`, folded in the same order
/// as [`FunctionSpec::evaluate`] so results agree bit for bit.
fn prime_power_block(spec: &FunctionSpec, lo: u64, hi: u64, base: &BasePrimes) -> Result<Vec<f64>> {
    let Rule::PrimePower(rule) = spec.rule() else {
        unreachable!("caller checked kind");
    };
    let additive = spec.kind().is_additive();
    let mut vals = vec![if additive { 0.0 } else { 1.0 }; (hi - lo) as usize];
    let mut cached_p = 0;
    let mut cache: Vec<f64> = Vec::new();
    let mut failure = None;
    visit_prime_powers(lo, hi, base, |i, p, e| {
        if p != cached_p {
            cached_p = p;
            cache.clear();
        }
        while cache.len() < e as usize {
            cache.push(rule(p, cache.len() as u32 + 1));
        }
        let v = cache[e as usize - 1];
        if !v.is_finite() {
            failure.get_or_insert((lo + i as u64, p, e));
            return;
        }
        if additive {
            vals[i] += v;
        } else {
            vals[i] *= v;
        }
    })?;
    if let Some((m, p, alpha)) = failure {
        return Err(Error::PrimePowerEvaluation {
            function: spec.name().to_string(),
            p,
            alpha,
            m: Some(m),
        });
    }
    Ok(vals)
}

fn pointwise_block(spec: &FunctionSpec, lo: u64, hi: u64) -> Result<Vec<f64>> {
    (lo..hi).map(|m| spec.evaluate_pointwise(m)).collect()
}

fn block_values(summand: &Summand, lo: u64, hi: u64, base: &BasePrimes) -> Result<BlockValues> {
    match summand {
        Summand::Function(spec) => {
            if let Some(which) = spec.exact_values() {
                return exact_block(which, lo, hi, base).map(BlockValues::Exact);
            }
            match spec.kind() {
                Kind::Pointwise => pointwise_block(spec, lo, hi).map(BlockValues::Real),
                _ => prime_power_block(spec, lo, hi, base).map(BlockValues::Real),
            }
        }
        Summand::PrimeSum(spec) => {
            let flags = prime_flags(lo, hi, base)?;
            let mut vals = vec![0.0; flags.len()];
            for (i, _) in flags.iter().enumerate().filter(|(_, &f)| f) {
                vals[i] = spec.evaluate_pointwise(lo + i as u64)?;
            }
            Ok(BlockValues::Real(vals))
        }
        Summand::PrimeCount => {
            let flags = prime_flags(lo, hi, base)?;
            Ok(BlockValues::Exact(flags.into_iter().map(i64::from).collect()))
        }
    }
}

fn check_summand(summand: &Summand) -> Result<()> {
    if let Summand::PrimeSum(spec) = summand {
        if spec.kind() != Kind::Pointwise {
            return Err(Error::WrongKind {
                function: spec.name().to_string(),
                reason: "prime sums need a pointwise function".into(),
            });
        }
    }
    Ok(())
}

impl Summator {
    /// Computes `S(n_i)` for every checkpoint in one streaming pass.
    pub fn summatory(&self, summand: &Summand, grid: &[u64]) -> Result<SummatorySeries> {
        if grid.is_empty() {
            return Err(Error::InvalidGrid);
        }
        self.accumulate(summand, grid, 0, AccumulatorState::zero(summand.is_exact()))
    }

    /// Extends `previous` to `grid`, which must start with `previous.grid()`.
    /// The output equals a cold run on `grid` exactly.
    pub fn resume(
        &self,
        summand: &Summand,
        previous: &SummatorySeries,
        grid: &[u64],
    ) -> Result<SummatorySeries> {
        let k = previous.len();
        if grid.len() < k || grid[..k] != *previous.grid() || previous.function_name() != summand.name() {
            return Err(Error::Precondition(
                "checkpoint grid is not a prefix of the requested grid".into(),
            ));
        }
        let tail = self.accumulate(summand, &grid[k..], previous.n_max(), previous.end_state())?;
        let values = match (&previous.values, tail.values) {
            (SeriesValues::Exact(a), SeriesValues::Exact(b)) => {
                SeriesValues::Exact(a.iter().chain(&b).copied().collect())
            }
            (SeriesValues::Real(a), SeriesValues::Real(b)) => {
                SeriesValues::Real(a.iter().chain(&b).copied().collect())
            }
            _ => return Err(Error::Precondition("checkpoint value type mismatch".into())),
        };
        SummatorySeries::from_parts(summand.name(), grid.to_vec(), values, tail.end_state)
    }

    fn accumulate(
        &self,
        summand: &Summand,
        grid: &[u64],
        start_after: u64,
        mut state: AccumulatorState,
    ) -> Result<SummatorySeries> {
        check_summand(summand)?;
        if !is_strictly_increasing(grid) {
            return Err(Error::InvalidGrid);
        }
        if grid.is_empty() {
            let values = match state {
                AccumulatorState::Exact(_) => SeriesValues::Exact(Vec::new()),
                AccumulatorState::Real(_) => SeriesValues::Real(Vec::new()),
            };
            return Ok(SummatorySeries {
                function_name: summand.name(),
                grid: Vec::new(),
                values,
                end_state: state,
            });
        }
        if grid[0] <= start_after {
            return Err(Error::InvalidGrid);
        }
        let n_max = *grid.last().unwrap();
        let mut exact_out = Vec::new();
        let mut real_out = Vec::new();
        let mut next = 0;
        self.stream(
            start_after + 1,
            n_max,
            |lo, hi, base| block_values(summand, lo, hi, base),
            |lo, block| {
                match (block, &mut state) {
                    (BlockValues::Exact(vals), AccumulatorState::Exact(acc)) => {
                        for (i, v) in vals.into_iter().enumerate() {
                            *acc += v;
                            if next < grid.len() && lo + i as u64 == grid[next] {
                                exact_out.push(*acc);
                                next += 1;
                            }
                        }
                    }
                    (BlockValues::Real(vals), AccumulatorState::Real(acc)) => {
                        for (i, v) in vals.into_iter().enumerate() {
                            acc.add(v);
                            if next < grid.len() && lo + i as u64 == grid[next] {
                                real_out.push(acc.value());
                                next += 1;
                            }
                        }
                    }
                    _ => unreachable!("summand exactness is fixed"),
                }
                Ok(())
            },
        )?;
        let values = match state {
            AccumulatorState::Exact(_) => SeriesValues::Exact(exact_out),
            AccumulatorState::Real(_) => SeriesValues::Real(real_out),
        };
        SummatorySeries::from_parts(summand.name(), grid.to_vec(), values, state)
    }

    pub fn compute_summatory(&self, spec: &FunctionSpec, grid: &[u64]) -> Result<SummatorySeries> {
        self.summatory(&Summand::Function(spec.clone()), grid)
    }

    /// `M(n) = Σ μ(m)`.
    pub fn mertens(&self, grid: &[u64]) -> Result<SummatorySeries> {
        let mut s = self.compute_summatory(&builtins::mobius(), grid)?;
        s.function_name = "mertens".into();
        Ok(s)
    }

    /// `θ(n) = Σ_{p≤n} ln p`; shares its code path with `prime_sum(log)`.
    pub fn chebyshev_theta(&self, grid: &[u64]) -> Result<SummatorySeries> {
        self.prime_sum(&builtins::log(), grid)
    }

    pub fn prime_sum(&self, spec: &FunctionSpec, grid: &[u64]) -> Result<SummatorySeries> {
        self.summatory(&Summand::PrimeSum(spec.clone()), grid)
    }

    pub fn squarefree_count(&self, grid: &[u64]) -> Result<SummatorySeries> {
        self.compute_summatory(&builtins::squarefree(), grid)
    }

    pub fn prime_count_series(&self, grid: &[u64]) -> Result<SummatorySeries> {
        self.summatory(&Summand::PrimeCount, grid)
    }

    /// Calls `visit(m, f(m))` for `m = 1..=n` in ascending order.
    pub fn for_each_value<F>(&self, summand: &Summand, n: u64, mut visit: F) -> Result<()>
    where
        F: FnMut(u64, f64),
    {
        check_summand(summand)?;
        self.stream(
            1,
            n,
            |lo, hi, base| block_values(summand, lo, hi, base),
            |lo, block| {
                match block {
                    BlockValues::Exact(v) => {
                        for (i, x) in v.into_iter().enumerate() {
                            visit(lo + i as u64, x as f64);
                        }
                    }
                    BlockValues::Real(v) => {
                        for (i, x) in v.into_iter().enumerate() {
                            visit(lo + i as u64, x);
                        }
                    }
                }
                Ok(())
            },
        )
    }

    /// `E[f,n]` and `D[f,n] = (1/n)Σf² − E²`, clamped at zero.
    pub fn empirical_variance(&self, spec: &FunctionSpec, n: u64) -> Result<MeanVariance> {
        if n == 0 {
            return Err(Error::Precondition("empirical variance needs n ≥ 1".into()));
        }
        let mut sum = CompensatedSum::new();
        let mut sum_sq = CompensatedSum::new();
        self.for_each_value(&Summand::Function(spec.clone()), n, |_, x| {
            sum.add(x);
            sum_sq.add(x * x);
        })?;
        let mean = sum.value() / n as f64;
        let variance = (sum_sq.value() / n as f64 - mean * mean).max(0.0);
        Ok(MeanVariance { mean, variance })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::Registry;

    fn seq() -> Summator {
        Summator::sequential()
    }

    fn one(s: &SummatorySeries) -> f64 {
        s.value(0)
    }

    #[test]
    fn summatory_examples() {
        let s = seq();
        let r = Registry;
        assert_eq!(s.compute_summatory(&r.get("omega").unwrap(), &[10]).unwrap().exact_value(0), Some(11));
        assert_eq!(s.compute_summatory(&r.get("big_omega").unwrap(), &[10]).unwrap().exact_value(0), Some(15));
        let lp = s.compute_summatory(&r.get("log_phi").unwrap(), &[10]).unwrap();
        assert!((one(&lp) - 18432f64.ln()).abs() < 1e-12);
        assert_eq!(s.compute_summatory(&r.get("unit").unwrap(), &[1]).unwrap().exact_value(0), Some(1));
    }

    #[test]
    fn mean_and_density() {
        let s = seq();
        let om = s.compute_summatory(&builtins::omega(), &[10]).unwrap();
        assert!((om.mean_value(0) - 1.1).abs() < 1e-15);
        let unit = s.compute_summatory(&builtins::unit(), &[7, 13]).unwrap();
        assert_eq!(unit.mean_value(1), 1.0);
        assert_eq!(s.compute_summatory(&builtins::unit(), &[5]).unwrap().density(0), 1.0);
        assert!((s.mertens(&[10]).unwrap().mean_value(0) + 0.1).abs() < 1e-15);
        assert!((s.squarefree_count(&[10]).unwrap().density(0) - 0.7).abs() < 1e-15);
        assert!((s.prime_count_series(&[10]).unwrap().density(0) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn variance_examples() {
        let s = seq();
        let mv = s.empirical_variance(&builtins::unit(), 100).unwrap();
        assert_eq!((mv.mean, mv.variance), (1.0, 0.0));
        let mv = s.empirical_variance(&builtins::omega(), 10).unwrap();
        assert!((mv.mean - 1.1).abs() < 1e-15);
        assert!((mv.variance - 0.29).abs() < 1e-14);
        let mv = s.empirical_variance(&builtins::log(), 1).unwrap();
        assert_eq!((mv.mean, mv.variance), (0.0, 0.0));
        assert!(s.empirical_variance(&builtins::log(), 0).is_err());
    }

    #[test]
    fn special_sums() {
        let s = seq();
        assert_eq!(s.mertens(&[1, 2, 10]).unwrap().values(), &SeriesValues::Exact(vec![1, 0, -1]));
        let th = s.chebyshev_theta(&[1, 2, 10]).unwrap();
        assert_eq!(th.value(0), 0.0);
        assert!((th.value(1) - 2f64.ln()).abs() < 1e-15);
        assert!((th.value(2) - 210f64.ln()).abs() < 1e-13);
        let rp = s.prime_sum(&builtins::reciprocal(), &[1, 10]).unwrap();
        assert_eq!(rp.value(0), 0.0);
        assert!((rp.value(1) - (0.5 + 1.0 / 3.0 + 0.2 + 1.0 / 7.0)).abs() < 1e-15);
        let lg = s.prime_sum(&builtins::log(), &[10]).unwrap();
        assert_eq!(lg.value(0).to_bits(), th.value(2).to_bits());
        assert_eq!(
            s.squarefree_count(&[1, 4, 10]).unwrap().values(),
            &SeriesValues::Exact(vec![1, 3, 7])
        );
        assert!(s.prime_sum(&builtins::omega(), &[10]).is_err());
    }

    #[test]
    fn grid_validation() {
        let s = seq();
        assert!(matches!(s.mertens(&[10, 5]), Err(Error::InvalidGrid)));
        assert!(matches!(s.mertens(&[5, 5]), Err(Error::InvalidGrid)));
        assert!(s.mertens(&[]).is_err());
        let capped = seq().with_cap(100);
        assert!(matches!(capped.mertens(&[101]), Err(Error::BoundExceedsCap { .. })));
    }

    #[test]
    fn evaluation_errors_name_the_integer() {
        let s = seq();
        let bad = FunctionSpec::additive("bad", |p, a| if p == 7 && a == 2 { f64::INFINITY } else { 0.0 });
        let err = s.compute_summatory(&bad, &[200]).unwrap_err();
        assert!(matches!(err, Error::PrimePowerEvaluation { p: 7, alpha: 2, m: Some(49), .. }));
        let inv_log = FunctionSpec::pointwise("inv_log", |t| 1.0 / t.ln());
        let err = s.compute_summatory(&inv_log, &[5]).unwrap_err();
        assert!(matches!(err, Error::PointwiseEvaluation { m: 1, .. }));
    }

    #[test]
    fn block_path_matches_direct_evaluation_bitwise() {
        use crate::sieve::{factorize, SpfTable};
        let t = SpfTable::new(5000).unwrap();
        for spec in [builtins::log_phi(), builtins::g_star(), builtins::g_star().log_of().unwrap()] {
            let mut direct = CompensatedSum::new();
            let mut grid = Vec::new();
            let mut expect = Vec::new();
            for m in 1..=5000u64 {
                direct.add(spec.evaluate(&factorize(m, &t).unwrap()).unwrap());
                if m % 499 == 0 {
                    grid.push(m);
                    expect.push(direct.value());
                }
            }
            let got = seq().with_block_size(613).compute_summatory(&spec, &grid).unwrap();
            assert_eq!(got.values(), &SeriesValues::Real(expect));
        }
    }

    #[test]
    fn resume_equals_cold_run() {
        let s = seq().with_block_size(1000);
        let grid = [100, 1000, 5000, 12_345, 40_000];
        for summand in [
            Summand::Function(builtins::log_phi()),
            Summand::Function(builtins::big_omega()),
            Summand::PrimeSum(builtins::log()),
        ] {
            let cold = s.summatory(&summand, &grid).unwrap();
            let partial = s.summatory(&summand, &grid[..3]).unwrap();
            let resumed = s.resume(&summand, &partial, &grid).unwrap();
            assert_eq!(cold, resumed);
            assert!(s.resume(&summand, &partial, &grid[1..]).is_err());
        }
    }

    #[test]
    fn prefix_consistency() {
        let s = seq();
        let coarse = s.compute_summatory(&builtins::log_phi(), &[1000, 100_000]).unwrap();
        let fine = s.compute_summatory(&builtins::log_phi(), &[10, 1000, 5000, 100_000]).unwrap();
        assert_eq!(coarse.value(0), fine.value(1));
        assert_eq!(coarse.value(1), fine.value(3));
        assert_eq!(fine.prefix(2).unwrap().grid(), &[10, 1000]);
    }
}
