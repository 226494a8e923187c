use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// A reproducible random stream identified by `(seed, stream_id)`.
///
/// The same pair always yields the same sequence. Distinct stream ids select
/// disjoint ChaCha streams, so one stream per Monte-Carlo trial gives
/// independent draws regardless of how trials are scheduled.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// Fills `out` with i.i.d. CN(0, variance) entries. No argument checks.
pub fn fill_cscg<R: Rng + ?Sized>(out: &mut [Complex64], variance: f64, rng: &mut R) {
    let sd = (0.5 * variance).sqrt();
    for z in out.iter_mut() {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *z = Complex64::new(sd * re, sd * im);
    }
}

/// Draws a length-`n` vector of i.i.d. zero-mean circularly-symmetric complex
/// Gaussian entries with `E|z|^2 = variance`.
pub fn sample_cscg_vector(n: usize, variance: f64, rng: &mut RngStream) -> Result<Vec<Complex64>> {
    if n == 0 {
        return Err(Error::arg("vector length must be positive"));
    }
    if !(variance > 0.0 && variance.is_finite()) {
        return Err(Error::arg(format!(
            "variance must be positive and finite, got {variance}"
        )));
    }
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    fill_cscg(&mut out, variance, rng);
    Ok(out)
}
