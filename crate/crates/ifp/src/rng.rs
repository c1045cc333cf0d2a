//! Counter-based random number streams.
//!
//! Every draw is a pure function of `(key, counter)`, so simulations can be
//! partitioned across threads in any way without changing the numbers: a
//! path's stream is keyed by `(seed, path)` and consumed sequentially, or
//! addressed directly by `(seed, path, t, tag)`. Output is the SplitMix64
//! sequence, whose state at counter `n` is `key + n * GAMMA`.

#![allow(clippy::excessive_precision)] // AS 241 coefficients kept verbatim

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn finalize(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Value at position `counter` of the stream with the given key.
#[inline]
pub fn at(key: u64, counter: u64) -> u64 {
    finalize(key.wrapping_add(counter.wrapping_mul(GAMMA)))
}

/// Derive a child key, used to split a seed into independent streams.
#[inline]
pub fn derive(key: u64, id: u64) -> u64 {
    finalize(key ^ finalize(id.wrapping_add(GAMMA)))
}

/// A sequential view over one counter-based stream.
#[derive(Debug, Clone)]
pub struct Stream {
    key: u64,
    counter: u64,
}

impl Stream {
    pub fn new(seed: u64) -> Self {
        Stream {
            key: derive(seed, 0),
            counter: 0,
        }
    }

    /// Independent substream, e.g. one per simulation path.
    pub fn substream(seed: u64, ids: &[u64]) -> Self {
        let mut key = derive(seed, 0);
        for &id in ids {
            key = derive(key, id);
        }
        Stream { key, counter: 0 }
    }

    /// Jump directly to a position; used for (t, tag)-addressed draws.
    pub fn at_counter(&self, counter: u64) -> u64 {
        at(self.key, counter)
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let v = at(self.key, self.counter);
        self.counter += 1;
        v
    }

    /// Uniform draw in the open interval (0, 1).
    #[inline]
    pub fn next_uniform(&mut self) -> f64 {
        u64_to_open01(self.next_u64())
    }

    /// Standard normal draw via the inverse distribution function; exactly
    /// one counter increment per draw.
    #[inline]
    pub fn next_normal(&mut self) -> f64 {
        normal_quantile(self.next_uniform())
    }

    /// Index drawn from the discrete distribution given by `probs`
    /// (assumed to sum to one).
    pub fn next_index(&mut self, probs: &[f64]) -> usize {
        sample_index(probs, self.next_uniform())
    }
}

/// Map a u64 to (0, 1): 53 mantissa bits, offset by half an ulp so the
/// endpoints are excluded.
#[inline]
pub fn u64_to_open01(v: u64) -> f64 {
    ((v >> 11) as f64 + 0.5) * (1.0 / 9007199254740992.0)
}

/// Inverse CDF of the discrete distribution `probs` at `u`.
pub fn sample_index(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

/// Standard normal quantile (Wichura's AS 241, double precision).
pub fn normal_quantile(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0);
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q * poly(r, &A) / poly(r, &B);
    }
    let mut r = if q < 0.0 { p } else { 1.0 - p };
    r = (-r.ln()).sqrt();
    let x = if r <= 5.0 {
        let r = r - 1.6;
        poly(r, &C) / poly(r, &D)
    } else {
        let r = r - 5.0;
        poly(r, &E) / poly(r, &F)
    };
    if q < 0.0 {
        -x
    } else {
        x
    }
}

fn poly(x: f64, coeffs: &[f64; 8]) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

const A: [f64; 8] = [
    3.3871328727963666080e0,
    1.3314166789178437745e2,
    1.9715909503065514427e3,
    1.3731693765509461125e4,
    4.5921953931549871457e4,
    6.7265770927008700853e4,
    3.3430575583588128105e4,
    2.5090809287301226727e3,
];
const B: [f64; 8] = [
    1.0,
    4.2313330701600911252e1,
    6.8718700749205790830e2,
    5.3941960214247511077e3,
    2.1213794301586595867e4,
    3.9307895800092710610e4,
    2.8729085735721942674e4,
    5.2264952788528545610e3,
];
const C: [f64; 8] = [
    1.42343711074968357734e0,
    4.63033784615654529590e0,
    5.76949722146069140550e0,
    3.64784832476320460504e0,
    1.27045825245236838258e0,
    2.41780725177450611770e-1,
    2.27238449892691845833e-2,
    7.74545014278341407640e-4,
];
const D: [f64; 8] = [
    1.0,
    2.05319162663775882187e0,
    1.67638483018380384940e0,
    6.89767334985100004550e-1,
    1.48103976427480074590e-1,
    1.51986665636164571966e-2,
    5.47593808499534494600e-4,
    1.05075007164441684324e-9,
];
const E: [f64; 8] = [
    6.65790464350110377720e0,
    5.46378491116411436990e0,
    1.78482653991729133580e0,
    2.96560571828504891230e-1,
    2.65321895265761230930e-2,
    1.24266094738807843860e-3,
    2.71155556874348757815e-5,
    2.01033439929228813265e-7,
];
const F: [f64; 8] = [
    1.0,
    5.99832206555887937690e-1,
    1.36929880922735805310e-1,
    1.48753612908506148525e-2,
    7.86869131145613259100e-4,
    1.84631831751005468180e-5,
    1.42151175831644588870e-7,
    2.04426310338993978564e-15,
];
