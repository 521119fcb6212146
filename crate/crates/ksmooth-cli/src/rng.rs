//! Seeded random generation for the benchmark protocol.
//!
//! A SplitMix64 counter generator feeds Box-Muller normal deviates, so every
//! benchmark data set is reproducible from its seed alone, on any platform,
//! up to the usual float rounding of `ln`, `sqrt`, `sin`, and `cos`.

/// SplitMix64: a 64-bit counter stepped by a fixed odd increment, whose
/// output is a finalizing bit mix of the counter. Every seed gives an
/// independent full-period stream.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
    spare_normal: Option<f64>,
}

impl SplitMix64 {
    /// Creates a stream seeded with `seed`.
    pub fn new(seed: u64) -> Self {
        Self {
            state: seed,
            spare_normal: None,
        }
    }

    /// Next raw 64-bit output.
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    /// Uniform draw in the half-open interval `(0, 1]`, so logarithms of the
    /// output are always finite.
    pub fn uniform(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal deviate via the Box-Muller transform; deviates come in
    /// pairs and the spare is cached.
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let r = (-2.0 * self.uniform().ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * self.uniform();
        self.spare_normal = Some(r * theta.sin());
        r * theta.cos()
    }
}

/// The benchmark regression surface `f(x) = Σ x_k + exp(−16 (Σ x_k)²)`: an
/// affine ramp with a sharp bump at the ridge `Σ x_k = 0`.
pub fn protocol_surface(row: &[f64]) -> f64 {
    let s: f64 = row.iter().sum();
    s + (-16.0 * s * s).exp()
}

/// Draws the synthetic benchmark data set: `n` inputs from a centered
/// Gaussian with variance 0.6 per coordinate, and responses
/// `y = f(x) + w` with noise variance 0.7.
///
/// Returns row-major `n × d` inputs and the `n` responses.
pub fn protocol_sample(seed: u64, n: usize, d: usize) -> (Vec<f64>, Vec<f64>) {
    let mut rng = SplitMix64::new(seed);
    let x_scale = 0.6_f64.sqrt();
    let noise_scale = 0.7_f64.sqrt();
    let mut inputs = Vec::with_capacity(n * d);
    for _ in 0..n * d {
        inputs.push(x_scale * rng.normal());
    }
    let outputs = (0..n)
        .map(|i| protocol_surface(&inputs[i * d..(i + 1) * d]) + noise_scale * rng.normal())
        .collect();
    (inputs, outputs)
}
