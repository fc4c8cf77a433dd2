//! Trial-division oracle, independent of the sieve.

#![allow(dead_code)]

/// `(p, α)` pairs of `m`, primes ascending.
pub fn trial_factor(mut m: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= m {
        if m % p == 0 {
            let mut a = 0;
            while m % p == 0 {
                m /= p;
                a += 1;
            }
            out.push((p, a));
        }
        p += 1;
    }
    if m > 1 {
        out.push((m, 1));
    }
    out
}

pub fn mu(m: u64) -> i8 {
    let f = trial_factor(m);
    if f.iter().any(|&(_, a)| a > 1) {
        0
    } else if f.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

pub fn omega(m: u64) -> u8 {
    trial_factor(m).len() as u8
}

pub fn big_omega(m: u64) -> u8 {
    trial_factor(m).iter().map(|&(_, a)| a as u8).sum()
}

/// Euler's totient by counting `k ≤ m` with `gcd(k, m) = 1`.
pub fn phi_by_gcd(m: u64) -> u64 {
    (1..=m).filter(|&k| gcd(k, m) == 1).count() as u64
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn is_prime(m: u64) -> bool {
    m >= 2 && trial_factor(m) == [(m, 1)]
}
