//! Deterministic noise streams for the driving Brownian motions.
//!
//! Every simulation is driven by a [`NoisePath`]: a counter-based stream of
//! i.i.d. standard normal increment vectors derived from a 64-bit seed.
//! Ensemble paths get statistically independent sub-streams by mixing the
//! path index into the seed, so a run is reproducible for any worker count
//! and any order of path execution.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer: a bijective mix with good avalanche.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// SplitMix64 generator. The state advances along a Weyl sequence and the
/// output is `mix64` of the state, which makes the n-th output a pure
/// function of (seed, n): a counter-based generator.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn seed_from_u64(seed: u64) -> Self {
        Self { state: seed }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }

    /// Uniform in the open interval (0, 1), using the top 53 bits.
    #[inline]
    pub fn next_open01(&mut self) -> f64 {
        const DEN: f64 = (1u64 << 53) as f64;
        (((self.next_u64() >> 11) as f64) + 0.5) / DEN
    }
}

/// Deterministic stream of standard normal increment vectors (p per step).
///
/// Identical seeds produce identical increment sequences. Sub-streams for
/// ensemble paths are derived by counter-based splitting: the path index is
/// mixed into the seed, so sub-streams do not depend on how many other
/// paths exist or in which order they run.
#[derive(Clone, Debug)]
pub struct NoisePath {
    seed: u64,
    gen: SplitMix64,
}

impl NoisePath {
    pub fn from_seed(seed: u64) -> Self {
        Self {
            seed,
            gen: SplitMix64::seed_from_u64(mix64(seed ^ GOLDEN_GAMMA)),
        }
    }

    /// Independent sub-stream for ensemble path `index`.
    pub fn substream(&self, index: u64) -> Self {
        let sub = mix64(self.seed ^ mix64(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)));
        Self {
            seed: sub,
            gen: SplitMix64::seed_from_u64(mix64(sub ^ GOLDEN_GAMMA)),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Two standard normals via the Box-Muller transform.
    #[inline]
    fn normal_pair(&mut self) -> (f64, f64) {
        let u1 = self.gen.next_open01();
        let u2 = self.gen.next_open01();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = std::f64::consts::TAU * u2;
        (r * theta.cos(), r * theta.sin())
    }

    /// Fill `out` with standard normals. A trailing half pair is discarded
    /// so the stream position depends only on how many steps were taken,
    /// not on the parity of p.
    pub fn fill_normals(&mut self, out: &mut [f64]) {
        let mut k = 0;
        while k + 1 < out.len() {
            let (a, b) = self.normal_pair();
            out[k] = a;
            out[k + 1] = b;
            k += 2;
        }
        if k < out.len() {
            let (a, _) = self.normal_pair();
            out[k] = a;
        }
    }

    /// Next increment vector of dimension `p`.
    pub fn normal_vec(&mut self, p: usize) -> Vec<f64> {
        let mut v = vec![0.0; p];
        self.fill_normals(&mut v);
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_seed_identical_sequence() {
        let mut a = NoisePath::from_seed(7);
        let mut b = NoisePath::from_seed(7);
        for _ in 0..100 {
            assert_eq!(a.normal_vec(3), b.normal_vec(3));
        }
    }

    #[test]
    fn substreams_differ_and_are_stable() {
        let base = NoisePath::from_seed(42);
        let mut s0 = base.substream(0);
        let mut s1 = base.substream(1);
        let v0 = s0.normal_vec(4);
        let v1 = s1.normal_vec(4);
        assert_ne!(v0, v1);
        // re-deriving the same substream gives the same values
        let mut s0b = base.substream(0);
        assert_eq!(v0, s0b.normal_vec(4));
    }

    #[test]
    fn normals_have_unit_scale() {
        let mut rng = NoisePath::from_seed(123);
        let n = 200_000;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..n {
            let z = rng.normal_vec(1)[0];
            sum += z;
            sumsq += z * z;
        }
        let mean = sum / n as f64;
        let var = sumsq / n as f64 - mean * mean;
        assert!(mean.abs() < 0.01, "mean = {mean}");
        assert!((var - 1.0).abs() < 0.02, "var = {var}");
    }

    #[test]
    fn odd_width_consumes_whole_pairs() {
        // after one 3-vector the stream is at the same point as after
        // two pairs, so a following draw matches
        let mut a = NoisePath::from_seed(9);
        let mut b = NoisePath::from_seed(9);
        let _ = a.normal_vec(3);
        let _ = b.normal_vec(4);
        assert_eq!(a.normal_vec(2), b.normal_vec(2));
    }
}
