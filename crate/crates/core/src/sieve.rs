//! Segmented sieve producing per-integer factorization data.
//!
//! A block `[lo, hi)` is sieved against a shared, immutable list of base
//! primes covering `√(hi−1)`. Blocks are independent of one another, so a
//! caller may build them on any number of workers and reduce in ascending
//! order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Default number of integers per block.
pub const DEFAULT_BLOCK_SIZE: usize = 1 << 20;

/// Largest bound any sieve in this crate accepts.
pub const MAX_BOUND: u64 = 1 << 62;

/// Magic header of the binary base-prime cache.
pub const PRIME_CACHE_MAGIC: &[u8; 8] = b"SPRIMES1";

/// Integer square root, `⌊√n⌋`.
pub fn isqrt(n: u64) -> u64 {
    if n < 2 {
        return n;
    }
    let mut r = (n as f64).sqrt() as u64;
    while r.checked_mul(r).map_or(true, |sq| sq > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|sq| sq <= n) {
        r += 1;
    }
    r
}

fn simple_sieve(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for i in 2..=n {
        if composite[i] {
            continue;
        }
        primes.push(i as u64);
        let mut j = i.saturating_mul(i);
        while j <= n {
            composite[j] = true;
            j += i;
        }
    }
    primes
}

/// Every prime up to `bound`, ascending. The bound is part of the value so a
/// block can check that its base primes are complete.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasePrimes {
    bound: u64,
    primes: Vec<u64>,
}

impl BasePrimes {
    pub fn up_to(bound: u64) -> Self {
        Self {
            bound,
            primes: primes_up_to(bound),
        }
    }

    /// Base primes sufficient to sieve every integer below `hi`.
    pub fn for_limit(hi: u64) -> Self {
        Self::up_to(isqrt(hi.saturating_sub(1)))
    }

    /// Wraps an externally produced list. Only ordering and range are checked;
    /// the caller vouches that no prime ≤ `bound` is missing.
    pub fn from_parts(bound: u64, primes: Vec<u64>) -> Result<Self> {
        let ascending = primes.windows(2).all(|w| w[0] < w[1]);
        let in_range = primes.first().map_or(true, |&p| p >= 2)
            && primes.last().map_or(true, |&p| p <= bound);
        if !ascending || !in_range {
            return Err(Error::Precondition(
                "base primes must be ascending and within their bound".into(),
            ));
        }
        Ok(Self { bound, primes })
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// Writes the binary cache: magic, bound, count, then each prime, all
    /// little-endian 64-bit.
    pub fn write_cache(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(PRIME_CACHE_MAGIC)?;
        w.write_all(&self.bound.to_le_bytes())?;
        w.write_all(&(self.primes.len() as u64).to_le_bytes())?;
        for p in &self.primes {
            w.write_all(&p.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_cache(path: &Path) -> Result<Self> {
        let bad = |reason: &str| Error::Format {
            path: path.to_path_buf(),
            reason: reason.to_string(),
        };
        let mut r = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic).map_err(|_| bad("truncated header"))?;
        if &magic != PRIME_CACHE_MAGIC {
            return Err(bad("bad magic"));
        }
        let mut word = [0u8; 8];
        let mut next = |r: &mut BufReader<File>| -> Result<u64> {
            r.read_exact(&mut word).map_err(|_| bad("truncated body"))?;
            Ok(u64::from_le_bytes(word))
        };
        let bound = next(&mut r)?;
        let count = next(&mut r)?;
        let mut primes = Vec::with_capacity(count.min(1 << 24) as usize);
        for _ in 0..count {
            primes.push(next(&mut r)?);
        }
        Self::from_parts(bound, primes).map_err(|_| bad("primes out of order"))
    }

    /// Loads `primes-<bound>.bin` from `dir` when present and valid; otherwise
    /// sieves and tries to write the cache.
    pub fn cached(dir: &Path, bound: u64) -> Self {
        let path = dir.join(format!("primes-{bound}.bin"));
        if let Ok(cached) = Self::read_cache(&path) {
            if cached.bound == bound {
                return cached;
            }
        }
        let fresh = Self::up_to(bound);
        let _ = fresh.write_cache(&path);
        fresh
    }
}

fn check_base(lo: u64, hi: u64, base: &BasePrimes) -> Result<()> {
    if lo < 1 || lo >= hi {
        return Err(Error::InvalidRange { lo, hi });
    }
    if hi > MAX_BOUND {
        return Err(Error::BoundExceedsCap {
            requested: hi,
            cap: MAX_BOUND,
        });
    }
    let needed = isqrt(hi - 1);
    if base.bound < needed {
        return Err(Error::IncompleteBasePrimes {
            needed,
            have: base.bound,
        });
    }
    Ok(())
}

/// Calls `visit(i, p, e)` for every prime power `p^e ‖ lo+i`, `i < hi−lo`.
///
/// For each integer the visits arrive with `p` strictly increasing; the single
/// prime factor above `√(hi−1)`, if any, comes last with `e = 1`.
pub(crate) fn visit_prime_powers<F>(lo: u64, hi: u64, base: &BasePrimes, mut visit: F) -> Result<()>
where
    F: FnMut(usize, u64, u32),
{
    check_base(lo, hi, base)?;
    let mut rem: Vec<u64> = (lo..hi).collect();
    for &p in base.primes() {
        if p * p > hi - 1 {
            break;
        }
        let first = lo.div_ceil(p) * p;
        let mut m = first;
        while m < hi {
            let i = (m - lo) as usize;
            let mut r = rem[i] / p;
            let mut e = 1;
            while r % p == 0 {
                r /= p;
                e += 1;
            }
            rem[i] = r;
            visit(i, p, e);
            m += p;
        }
    }
    for (i, &r) in rem.iter().enumerate() {
        if r > 1 {
            visit(i, r, 1);
        }
    }
    Ok(())
}

/// Per-integer arithmetic data for `m ∈ [lo, hi)`.
///
/// `spf(1)` is the sentinel `1`; `μ(1) = 1`, `ω(1) = Ω(1) = 0`, `φ(1) = 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SieveBlock {
    lo: u64,
    hi: u64,
    spf: Vec<u64>,
    mu: Vec<i8>,
    omega: Vec<u8>,
    big_omega: Vec<u8>,
    phi: Vec<u64>,
}

impl SieveBlock {
    pub fn lo(&self) -> u64 {
        self.lo
    }

    pub fn hi(&self) -> u64 {
        self.hi
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.hi == self.lo
    }

    pub fn contains(&self, m: u64) -> bool {
        (self.lo..self.hi).contains(&m)
    }

    fn idx(&self, m: u64) -> usize {
        assert!(self.contains(m), "{m} outside block [{}, {})", self.lo, self.hi);
        (m - self.lo) as usize
    }

    pub fn spf(&self, m: u64) -> u64 {
        self.spf[self.idx(m)]
    }

    pub fn mu(&self, m: u64) -> i8 {
        self.mu[self.idx(m)]
    }

    pub fn omega(&self, m: u64) -> u8 {
        self.omega[self.idx(m)]
    }

    pub fn big_omega(&self, m: u64) -> u8 {
        self.big_omega[self.idx(m)]
    }

    pub fn phi(&self, m: u64) -> u64 {
        self.phi[self.idx(m)]
    }

    pub fn is_prime(&self, m: u64) -> bool {
        m >= 2 && self.spf(m) == m
    }

    pub fn spf_slice(&self) -> &[u64] {
        &self.spf
    }

    pub fn mu_slice(&self) -> &[i8] {
        &self.mu
    }

    pub fn omega_slice(&self) -> &[u8] {
        &self.omega
    }

    pub fn big_omega_slice(&self) -> &[u8] {
        &self.big_omega
    }

    pub fn phi_slice(&self) -> &[u64] {
        &self.phi
    }
}

/// Sieves `[lo, hi)` with the default block capacity.
pub fn build_block(lo: u64, hi: u64, base: &BasePrimes) -> Result<SieveBlock> {
    build_block_with_capacity(lo, hi, base, DEFAULT_BLOCK_SIZE)
}

pub fn build_block_with_capacity(
    lo: u64,
    hi: u64,
    base: &BasePrimes,
    capacity: usize,
) -> Result<SieveBlock> {
    if hi > lo && hi - lo > capacity as u64 {
        return Err(Error::BlockTooLarge {
            len: hi - lo,
            capacity,
        });
    }
    check_base(lo, hi, base)?;
    let len = (hi - lo) as usize;
    let mut block = SieveBlock {
        lo,
        hi,
        spf: vec![0; len],
        mu: vec![1; len],
        omega: vec![0; len],
        big_omega: vec![0; len],
        phi: vec![1; len],
    };
    visit_prime_powers(lo, hi, base, |i, p, e| {
        if block.spf[i] == 0 {
            block.spf[i] = p;
        }
        block.omega[i] += 1;
        block.big_omega[i] += e as u8;
        block.mu[i] = if e > 1 { 0 } else { -block.mu[i] };
        block.phi[i] *= (p - 1) * p.pow(e - 1);
    })?;
    if lo == 1 {
        block.spf[0] = 1;
    }
    Ok(block)
}

/// Primality flags for `[lo, hi)` by plain Eratosthenes crossing-off.
pub fn prime_flags(lo: u64, hi: u64, base: &BasePrimes) -> Result<Vec<bool>> {
    check_base(lo, hi, base)?;
    let mut flags = vec![true; (hi - lo) as usize];
    for m in lo..hi.min(2) {
        flags[(m - lo) as usize] = false;
    }
    for &p in base.primes() {
        if p * p > hi - 1 {
            break;
        }
        let mut m = (lo.div_ceil(p) * p).max(p * p);
        while m < hi {
            flags[(m - lo) as usize] = false;
            m += p;
        }
    }
    Ok(flags)
}

fn segments(n: u64) -> impl Iterator<Item = (u64, u64)> {
    let step = DEFAULT_BLOCK_SIZE as u64;
    (0..)
        .map(move |k| (1 + k * step, (1 + (k + 1) * step).min(n + 1)))
        .take_while(move |&(lo, _)| lo <= n)
}

/// Every prime `≤ n`, ascending.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n <= DEFAULT_BLOCK_SIZE as u64 {
        return simple_sieve(n);
    }
    let base = BasePrimes::up_to(isqrt(n));
    let mut out = Vec::new();
    for (lo, hi) in segments(n) {
        let flags = prime_flags(lo, hi, &base).expect("segment within base bound");
        out.extend(
            flags
                .iter()
                .enumerate()
                .filter(|(_, &f)| f)
                .map(|(i, _)| lo + i as u64),
        );
    }
    out
}

/// `π(n)`, counted exactly by sieving.
pub fn prime_count(n: u64) -> u64 {
    if n < 2 {
        return 0;
    }
    let base = BasePrimes::up_to(isqrt(n));
    segments(n)
        .map(|(lo, hi)| {
            let flags = prime_flags(lo, hi, &base).expect("segment within base bound");
            flags.iter().filter(|&&f| f).count() as u64
        })
        .sum()
}

/// One prime-power component `p^alpha` of a canonical factorization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimePower {
    pub p: u64,
    pub alpha: u32,
}

/// Canonical factorization `m = ∏ p^α`, primes strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    m: u64,
    factors: Vec<PrimePower>,
}

impl Factorization {
    /// Checks ordering and that the components multiply back to `m`.
    pub fn new(m: u64, factors: Vec<PrimePower>) -> Result<Self> {
        if m == 0 {
            return Err(Error::FactorizeZero);
        }
        let increasing = factors.windows(2).all(|w| w[0].p < w[1].p);
        let positive = factors.iter().all(|f| f.alpha >= 1 && f.p >= 2);
        let product = factors.iter().try_fold(1u64, |acc, f| {
            f.p.checked_pow(f.alpha).and_then(|q| acc.checked_mul(q))
        });
        if !increasing || !positive || product != Some(m) {
            return Err(Error::Precondition(format!(
                "{factors:?} is not a canonical factorization of {m}"
            )));
        }
        Ok(Self { m, factors })
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn factors(&self) -> &[PrimePower] {
        &self.factors
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|f| f.alpha == 1)
    }
}

/// Full smallest-prime-factor table for `m ≤ bound` (linear sieve).
#[derive(Debug, Clone)]
pub struct SpfTable {
    spf: Vec<u32>,
}

impl SpfTable {
    pub fn new(bound: u64) -> Result<Self> {
        if bound >= u32::MAX as u64 {
            return Err(Error::BoundExceedsCap {
                requested: bound,
                cap: u32::MAX as u64 - 1,
            });
        }
        let n = bound as usize;
        let mut spf = vec![0u32; n + 1];
        let mut primes: Vec<u32> = Vec::new();
        if n >= 1 {
            spf[1] = 1;
        }
        for i in 2..=n {
            if spf[i] == 0 {
                spf[i] = i as u32;
                primes.push(i as u32);
            }
            for &p in &primes {
                let ip = i * p as usize;
                if p > spf[i] || ip > n {
                    break;
                }
                spf[ip] = p;
            }
        }
        Ok(Self { spf })
    }

    pub fn bound(&self) -> u64 {
        self.spf.len() as u64 - 1
    }

    pub fn spf(&self, m: u64) -> u64 {
        self.spf[m as usize] as u64
    }
}

/// Canonical factorization of `m` read off the smallest-prime-factor table.
pub fn factorize(m: u64, table: &SpfTable) -> Result<Factorization> {
    if m == 0 {
        return Err(Error::FactorizeZero);
    }
    if m > table.bound() {
        return Err(Error::OutOfSieveBound {
            m,
            bound: table.bound(),
        });
    }
    let mut factors: Vec<PrimePower> = Vec::new();
    let mut r = m;
    while r > 1 {
        let p = table.spf(r);
        let mut alpha = 0;
        while r % p == 0 {
            r /= p;
            alpha += 1;
        }
        factors.push(PrimePower { p, alpha });
    }
    Ok(Factorization { m, factors })
}

/// Factorization by trial division with base primes covering `√m`.
pub fn factorize_with_base(m: u64, base: &BasePrimes) -> Result<Factorization> {
    if m == 0 {
        return Err(Error::FactorizeZero);
    }
    if base.bound() < isqrt(m) {
        return Err(Error::IncompleteBasePrimes {
            needed: isqrt(m),
            have: base.bound(),
        });
    }
    let mut factors = Vec::new();
    let mut r = m;
    for &p in base.primes() {
        if p * p > r {
            break;
        }
        if r % p == 0 {
            let mut alpha = 0;
            while r % p == 0 {
                r /= p;
                alpha += 1;
            }
            factors.push(PrimePower { p, alpha });
        }
    }
    if r > 1 {
        factors.push(PrimePower { p: r, alpha: 1 });
    }
    Ok(Factorization { m, factors })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pp(p: u64, alpha: u32) -> PrimePower {
        PrimePower { p, alpha }
    }

    #[test]
    fn small_block_values() {
        let base = BasePrimes::for_limit(11);
        let b = build_block(2, 11, &base).unwrap();
        assert_eq!(b.mu_slice(), &[-1, -1, 0, -1, 1, -1, 0, 0, 1]);
        assert_eq!(b.phi_slice(), &[1, 2, 2, 4, 2, 6, 4, 6, 4]);
        assert_eq!(b.spf_slice(), &[2, 3, 2, 5, 2, 7, 2, 3, 2]);
    }

    #[test]
    fn block_of_one() {
        let base = BasePrimes::for_limit(2);
        let b = build_block(1, 2, &base).unwrap();
        assert_eq!((b.mu(1), b.omega(1), b.big_omega(1), b.phi(1)), (1, 0, 0, 1));
        assert_eq!(b.spf(1), 1);
        assert!(!b.is_prime(1));
    }

    #[test]
    fn rejects_oversized_and_incomplete() {
        let base = BasePrimes::up_to(100);
        assert!(matches!(
            build_block_with_capacity(1, 1002, &base, 1000),
            Err(Error::BlockTooLarge { .. })
        ));
        let short = BasePrimes::up_to(10);
        assert!(matches!(
            build_block(1, 1000, &short),
            Err(Error::IncompleteBasePrimes { needed: 31, have: 10 })
        ));
        assert!(matches!(build_block(5, 5, &base), Err(Error::InvalidRange { .. })));
        assert!(matches!(build_block(0, 5, &base), Err(Error::InvalidRange { .. })));
    }

    #[test]
    fn factorize_examples() {
        let t = SpfTable::new(1000).unwrap();
        assert_eq!(factorize(12, &t).unwrap().factors(), &[pp(2, 2), pp(3, 1)]);
        assert_eq!(factorize(97, &t).unwrap().factors(), &[pp(97, 1)]);
        assert_eq!(
            factorize(360, &t).unwrap().factors(),
            &[pp(2, 3), pp(3, 2), pp(5, 1)]
        );
        assert!(factorize(1, &t).unwrap().factors().is_empty());
        assert!(matches!(factorize(0, &t), Err(Error::FactorizeZero)));
        assert!(matches!(factorize(1001, &t), Err(Error::OutOfSieveBound { .. })));
    }

    #[test]
    fn trial_factorization_agrees_with_table() {
        let t = SpfTable::new(5000).unwrap();
        let base = BasePrimes::up_to(100);
        for m in 1..=5000 {
            assert_eq!(factorize(m, &t).unwrap(), factorize_with_base(m, &base).unwrap());
        }
    }

    #[test]
    fn factorization_constructor_validates() {
        assert!(Factorization::new(12, vec![pp(2, 2), pp(3, 1)]).is_ok());
        assert!(Factorization::new(12, vec![pp(3, 1), pp(2, 2)]).is_err());
        assert!(Factorization::new(12, vec![pp(2, 1), pp(3, 1)]).is_err());
    }

    #[test]
    fn prime_lists_and_counts() {
        assert_eq!(primes_up_to(10), vec![2, 3, 5, 7]);
        assert!(primes_up_to(1).is_empty());
        assert!(primes_up_to(0).is_empty());
        assert_eq!(primes_up_to(100).len(), 25);
        assert_eq!(prime_count(10), 4);
        assert_eq!(prime_count(2), 1);
        assert_eq!(prime_count(1), 0);
        assert_eq!(prime_count(1_000_000), 78_498);
    }

    #[test]
    fn segmented_primes_match_simple_sieve() {
        let n = DEFAULT_BLOCK_SIZE as u64 * 2 + 17;
        assert_eq!(primes_up_to(n), simple_sieve(n));
        assert_eq!(prime_count(n), simple_sieve(n).len() as u64);
    }

    #[test]
    fn isqrt_edges() {
        for n in [0u64, 1, 2, 3, 4, 15, 16, 17, 99, 100, u32::MAX as u64, u64::MAX] {
            let r = isqrt(n);
            assert!(r * r <= n);
            assert!((r + 1).checked_mul(r + 1).map_or(true, |s| s > n));
        }
    }

    #[test]
    fn prime_cache_round_trip_and_magic() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.bin");
        let base = BasePrimes::up_to(1000);
        base.write_cache(&path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(&bytes[..8], b"SPRIMES1");
        assert_eq!(u64::from_le_bytes(bytes[8..16].try_into().unwrap()), 1000);
        assert_eq!(u64::from_le_bytes(bytes[16..24].try_into().unwrap()), 168);
        assert_eq!(u64::from_le_bytes(bytes[24..32].try_into().unwrap()), 2);
        assert_eq!(bytes.len(), 24 + 8 * 168);
        assert_eq!(BasePrimes::read_cache(&path).unwrap(), base);

        std::fs::write(&path, b"NOTPRIME________").unwrap();
        assert!(matches!(BasePrimes::read_cache(&path), Err(Error::Format { .. })));
        assert_eq!(BasePrimes::cached(dir.path(), 500), BasePrimes::up_to(500));
        assert!(dir.path().join("primes-500.bin").exists());
    }
}
