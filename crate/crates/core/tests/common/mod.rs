//! Independent reference models shared by the integration tests.
#![allow(dead_code)]

pub mod fixed {
    use num_bigint::BigInt;
    use num_integer::Integer;
    use num_traits::{One, ToPrimitive};

    pub const BOUNDARY_RAWS: [i32; 5] = [-(1 << 17), -1, 0, 1, (1 << 17) - 1];

    fn modulus() -> BigInt {
        BigInt::one() << 18u32
    }

    /// Reduces into [-2^17, 2^17).
    pub fn wrap(v: &BigInt) -> i32 {
        let half: BigInt = BigInt::one() << 17u32;
        let r: BigInt = (v + &half).mod_floor(&modulus()) - half;
        r.to_i32().unwrap()
    }

    pub fn add(a: i32, b: i32) -> i32 {
        wrap(&(BigInt::from(a) + BigInt::from(b)))
    }

    pub fn sub(a: i32, b: i32) -> i32 {
        wrap(&(BigInt::from(a) - BigInt::from(b)))
    }

    pub fn neg(a: i32) -> i32 {
        wrap(&-BigInt::from(a))
    }

    /// Q2.16 product: full width, truncate toward zero by 2^16, then wrap.
    pub fn mul_q216(a: i32, b: i32) -> i32 {
        let p = BigInt::from(a) * BigInt::from(b);
        // BigInt division truncates toward zero.
        wrap(&(p / BigInt::from(1 << 16)))
    }

    pub fn mul_int(a: i32, b: i32) -> i32 {
        wrap(&(BigInt::from(a) * BigInt::from(b)))
    }

    /// Exact round-half-even of x * 2^16, or None outside the raw range.
    pub fn encode(x: f64) -> Option<i32> {
        if !x.is_finite() {
            return None;
        }
        let bits = x.to_bits();
        let sign = if bits >> 63 == 1 { -1 } else { 1 };
        let exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, e) = if exp == 0 { (frac, -1074) } else { (frac | (1u64 << 52), exp - 1075) };
        // |x| * 2^16 = mant * 2^(e + 16)
        let shift = e + 16;
        let (num, den) = if shift >= 0 {
            (BigInt::from(mant) << shift as usize, BigInt::one())
        } else {
            (BigInt::from(mant), BigInt::one() << (-shift) as usize)
        };
        let (q, r) = num.div_mod_floor(&den);
        let twice = &r * 2;
        let q = if twice > den || (twice == den && q.is_odd()) { q + 1 } else { q };
        let signed = if sign < 0 { -q } else { q };
        let lo: BigInt = -(BigInt::one() << 17u32);
        let hi: BigInt = (BigInt::one() << 17u32) - 1;
        if signed < lo || signed > hi {
            return None;
        }
        signed.to_i32()
    }
}

pub mod dense {
    use std::f64::consts::FRAC_1_SQRT_2;

    use num_complex::Complex64 as C;

    pub type M = Vec<Vec<C>>;

    pub fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    pub fn identity(dim: usize) -> M {
        (0..dim).map(|i| (0..dim).map(|j| if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) }).collect()).collect()
    }

    pub fn matmul(a: &M, b: &M) -> M {
        let n = a.len();
        let mut out = vec![vec![c(0.0, 0.0); n]; n];
        for i in 0..n {
            for k in 0..n {
                if a[i][k] == c(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out[i][j] += a[i][k] * b[k][j];
                }
            }
        }
        out
    }

    pub fn h() -> M {
        let s = FRAC_1_SQRT_2;
        vec![vec![c(s, 0.0), c(s, 0.0)], vec![c(s, 0.0), c(-s, 0.0)]]
    }

    pub fn x() -> M {
        vec![vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]]
    }

    /// sqrt(X) = (1/2)[[1+i, 1-i], [1-i, 1+i]].
    pub fn sx() -> M {
        vec![vec![c(0.5, 0.5), c(0.5, -0.5)], vec![c(0.5, -0.5), c(0.5, 0.5)]]
    }

    pub fn rz(theta: f64) -> M {
        vec![vec![C::from_polar(1.0, -theta / 2.0), c(0.0, 0.0)], vec![c(0.0, 0.0), C::from_polar(1.0, theta / 2.0)]]
    }

    pub fn eswap(theta: f64) -> M {
        let p = C::from_polar(1.0, -theta / 2.0);
        let co = c((theta / 2.0).cos(), 0.0);
        let si = c(0.0, -(theta / 2.0).sin());
        let z = c(0.0, 0.0);
        vec![vec![p, z, z, z], vec![z, co, si, z], vec![z, si, co, z], vec![z, z, z, p]]
    }

    pub fn swap() -> M {
        let (o, z) = (c(1.0, 0.0), c(0.0, 0.0));
        vec![vec![o, z, z, z], vec![z, z, o, z], vec![z, o, z, z], vec![z, z, z, o]]
    }

    pub fn cnot() -> M {
        let (o, z) = (c(1.0, 0.0), c(0.0, 0.0));
        vec![vec![o, z, z, z], vec![z, o, z, z], vec![z, z, z, o], vec![z, z, o, z]]
    }

    pub fn crz(theta: f64) -> M {
        let mut m = identity(4);
        m[2][2] = C::from_polar(1.0, -theta / 2.0);
        m[3][3] = C::from_polar(1.0, theta / 2.0);
        m
    }

    /// Embeds a 1- or 2-qubit gate into n qubits. Qubit k is bit k of the
    /// basis index; a 2-qubit gate's local index is 2*bit(first) + bit(second).
    pub fn embed(g: &M, qubits: &[usize], n: usize) -> M {
        let dim = 1 << n;
        let local = |i: usize| qubits.iter().fold(0, |acc, &q| 2 * acc + ((i >> q) & 1));
        let mask: usize = qubits.iter().map(|&q| 1 << q).sum();
        let mut out = vec![vec![c(0.0, 0.0); dim]; dim];
        for i in 0..dim {
            for j in 0..dim {
                if i & !mask == j & !mask {
                    out[i][j] = g[local(i)][local(j)];
                }
            }
        }
        out
    }

    /// max |a - e^{i phase} b| with the phase fitted from the largest entry of b.
    pub fn distance_up_to_phase(a: &M, b: &M) -> f64 {
        let (mut bi, mut bj, mut best) = (0, 0, 0.0);
        for (i, row) in b.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if v.norm() > best {
                    best = v.norm();
                    bi = i;
                    bj = j;
                }
            }
        }
        let phase = a[bi][bj] / b[bi][bj];
        let phase = phase / phase.norm();
        let mut worst: f64 = 0.0;
        for (ra, rb) in a.iter().zip(b) {
            for (x, y) in ra.iter().zip(rb) {
                worst = worst.max((x - phase * y).norm());
            }
        }
        worst
    }

    /// Global phase `a = e^{i phase} b` at the largest entry of b.
    pub fn relative_phase(a: &M, b: &M) -> C {
        let mut best = (0, 0, 0.0);
        for (i, row) in b.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if v.norm() > best.2 {
                    best = (i, j, v.norm());
                }
            }
        }
        a[best.0][best.1] / b[best.0][best.1]
    }
}

pub mod reset {
    /// Success probability of the reset loop (2 consecutive zeros within 5
    /// readings) from a basis state, with each reading flipped with
    /// probability `r`. Sums over all 2^5 flip patterns.
    pub fn success_probability(start_excited: bool, r: f64) -> f64 {
        let mut total = 0.0;
        for pattern in 0u32..32 {
            let flips = pattern.count_ones() as i32;
            let weight = r.powi(flips) * (1.0 - r).powi(5 - flips);
            let mut excited = start_excited;
            let mut zeros = 0;
            let mut ok = false;
            for k in 0..5 {
                let reported = excited ^ (pattern >> k & 1 == 1);
                if reported {
                    excited = !excited;
                    zeros = 0;
                } else {
                    zeros += 1;
                }
                if zeros == 2 {
                    ok = true;
                    break;
                }
            }
            if ok {
                total += weight;
            }
        }
        total
    }
}

/// |x - p| within `k` binomial standard deviations for n samples.
pub fn within_sigma(count: u64, n: u64, p: f64, k: f64) -> bool {
    let f = count as f64 / n as f64;
    let sigma = (p * (1.0 - p) / n as f64).sqrt();
    (f - p).abs() <= k * sigma.max(1e-12)
}
