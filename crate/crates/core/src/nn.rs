//! Fixed-topology convolutional Q-network: two valid convolutions and two
//! fully connected layers, with exact backpropagation and SGD.
//!
//! All parameters live in one flat vector, sectioned in file order:
//! conv1 kernels (filter-major, row-major), conv1 biases, conv2 kernels
//! (output filter, input channel, row, column), conv2 biases, fc1 weights
//! (row-major, `r1 x flat`), fc1 biases, fc2 weights (`r2 x r1`), fc2 biases.
//! The fc1 input is the conv2 activation flattened channel-major
//! (`channel * side2^2 + row * side2 + col`).

use std::fs::File;
use std::io::{BufReader, Read};
use std::ops::Range;
use std::path::Path;

use crate::error::{Error, Result};
use crate::numerics::{fnv1a64, RandomStream};
use crate::util::atomic_write;

pub const WEIGHTS_MAGIC: &[u8; 4] = b"UAVQ";
pub const WEIGHTS_VERSION: u16 = 1;
/// Magic, version and seven u16 architecture fields.
pub const WEIGHTS_HEADER_LEN: usize = 4 + 2 + 7 * 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CnnArchitecture {
    /// Input side length.
    pub n1: usize,
    /// Conv1 kernel side.
    pub n2: usize,
    /// Conv2 kernel side.
    pub n3: usize,
    /// Conv1 filters.
    pub f1: usize,
    /// Conv2 filters.
    pub f2: usize,
    /// Hidden FC units.
    pub r1: usize,
    /// Outputs, one Q-value per action.
    pub r2: usize,
}

impl Default for CnnArchitecture {
    fn default() -> Self {
        Self { n1: 12, n2: 6, n3: 5, f1: 20, f2: 40, r1: 1000, r2: 31 }
    }
}

/// Offsets of each parameter group inside the flat vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParamLayout {
    pub conv1_w: Range<usize>,
    pub conv1_b: Range<usize>,
    pub conv2_w: Range<usize>,
    pub conv2_b: Range<usize>,
    pub fc1_w: Range<usize>,
    pub fc1_b: Range<usize>,
    pub fc2_w: Range<usize>,
    pub fc2_b: Range<usize>,
}

impl CnnArchitecture {
    pub fn validate(&self) -> Result<()> {
        let fields = [self.n1, self.n2, self.n3, self.f1, self.f2, self.r1, self.r2];
        if fields.iter().any(|&v| v == 0 || v > u16::MAX as usize) {
            return Err(Error::Format(format!("architecture fields out of range: {self:?}")));
        }
        if self.n2 + self.n3 > self.n1 + 1 {
            return Err(Error::Format(format!("kernels larger than input: {self:?}")));
        }
        Ok(())
    }

    pub fn input_len(&self) -> usize {
        self.n1 * self.n1
    }

    pub fn conv1_side(&self) -> usize {
        self.n1 - self.n2 + 1
    }

    pub fn conv2_side(&self) -> usize {
        self.conv1_side() - self.n3 + 1
    }

    pub fn flat_len(&self) -> usize {
        self.f2 * self.conv2_side().pow(2)
    }

    pub fn layout(&self) -> ParamLayout {
        let mut at = 0;
        let mut take = |n: usize| {
            let r = at..at + n;
            at += n;
            r
        };
        ParamLayout {
            conv1_w: take(self.f1 * self.n2 * self.n2),
            conv1_b: take(self.f1),
            conv2_w: take(self.f2 * self.f1 * self.n3 * self.n3),
            conv2_b: take(self.f2),
            fc1_w: take(self.r1 * self.flat_len()),
            fc1_b: take(self.r1),
            fc2_w: take(self.r2 * self.r1),
            fc2_b: take(self.r2),
        }
    }

    pub fn param_count(&self) -> usize {
        self.layout().fc2_b.end
    }

    /// Multiplies performed by conv2 in one forward pass:
    /// `f1 * f2 * n3^2 * (n1 - n2 - n3 + 2)^2`.
    pub fn conv2_multiplies(&self) -> u64 {
        (self.f1 * self.f2 * self.n3 * self.n3 * self.conv2_side().pow(2)) as u64
    }
}

/// All trainable parameters of the network (also used for gradients).
#[derive(Clone, Debug, PartialEq)]
pub struct CnnWeights {
    arch: CnnArchitecture,
    params: Vec<f64>,
}

impl CnnWeights {
    pub fn zeros(arch: CnnArchitecture) -> Self {
        Self { arch, params: vec![0.0; arch.param_count()] }
    }

    /// He initialization: weights ~ N(0, 2 / fan_in), biases 0.
    pub fn init(arch: CnnArchitecture, stream: &mut RandomStream) -> Self {
        let mut w = Self::zeros(arch);
        let l = arch.layout();
        let groups = [
            (l.conv1_w, arch.n2 * arch.n2),
            (l.conv2_w, arch.f1 * arch.n3 * arch.n3),
            (l.fc1_w, arch.flat_len()),
            (l.fc2_w, arch.r1),
        ];
        for (range, fan_in) in groups {
            let sd = (2.0 / fan_in as f64).sqrt();
            for p in &mut w.params[range] {
                *p = sd * stream.standard_normal();
            }
        }
        w
    }

    pub fn from_params(arch: CnnArchitecture, params: Vec<f64>) -> Result<Self> {
        if params.len() != arch.param_count() {
            return Err(Error::Structural(format!(
                "expected {} parameters, got {}",
                arch.param_count(),
                params.len()
            )));
        }
        Ok(Self { arch, params })
    }

    pub fn arch(&self) -> &CnnArchitecture {
        &self.arch
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn section(&self, range: Range<usize>) -> &[f64] {
        &self.params[range]
    }

    pub fn section_mut(&mut self, range: Range<usize>) -> &mut [f64] {
        &mut self.params[range]
    }

    pub fn is_finite(&self) -> bool {
        self.params.iter().all(|p| p.is_finite())
    }

    pub fn digest(&self) -> u64 {
        fnv1a64(&self.to_bytes())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let a = &self.arch;
        let mut out = Vec::with_capacity(WEIGHTS_HEADER_LEN + 8 * self.params.len());
        out.extend_from_slice(WEIGHTS_MAGIC);
        out.extend_from_slice(&WEIGHTS_VERSION.to_le_bytes());
        for v in [a.n1, a.n2, a.n3, a.f1, a.f2, a.r1, a.r2] {
            out.extend_from_slice(&(v as u16).to_le_bytes());
        }
        for p in &self.params {
            out.extend_from_slice(&p.to_le_bytes());
        }
        out
    }

    pub fn read_from(reader: &mut impl Read) -> Result<Self> {
        let mut header = [0u8; WEIGHTS_HEADER_LEN];
        reader.read_exact(&mut header)?;
        if &header[0..4] != WEIGHTS_MAGIC {
            return Err(Error::Format("bad weights magic".into()));
        }
        let version = u16::from_le_bytes([header[4], header[5]]);
        if version != WEIGHTS_VERSION {
            return Err(Error::Format(format!("unsupported weights version {version}")));
        }
        let f: Vec<usize> = (0..7)
            .map(|i| u16::from_le_bytes([header[6 + 2 * i], header[7 + 2 * i]]) as usize)
            .collect();
        let arch = CnnArchitecture { n1: f[0], n2: f[1], n3: f[2], f1: f[3], f2: f[4], r1: f[5], r2: f[6] };
        arch.validate()?;
        let n = arch.param_count();
        let mut buf = vec![0u8; 8 * n];
        reader.read_exact(&mut buf)?;
        let params: Vec<f64> = buf
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect();
        let mut extra = [0u8; 1];
        if reader.read(&mut extra)? != 0 {
            return Err(Error::Format("trailing bytes after weights; shape header inconsistent".into()));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::Format("non-finite parameter in weights file".into()));
        }
        Ok(Self { arch, params })
    }
}

/// Writes weights atomically (temporary file, then rename).
pub fn save_weights(weights: &CnnWeights, path: &Path) -> Result<()> {
    atomic_write(path, &weights.to_bytes())
}

pub fn load_weights(path: &Path) -> Result<CnnWeights> {
    let mut r = BufReader::new(File::open(path)?);
    CnnWeights::read_from(&mut r)
}

/// Like [`load_weights`] but also requires a specific architecture.
pub fn load_weights_for(path: &Path, arch: &CnnArchitecture) -> Result<CnnWeights> {
    let w = load_weights(path)?;
    if w.arch() != arch {
        return Err(Error::Format(format!("weights architecture {:?} does not match {:?}", w.arch(), arch)));
    }
    Ok(w)
}

/// Multiply-accumulate counts per layer, summed over every forward pass
/// they were passed to.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OpCounts {
    pub conv1: u64,
    pub conv2: u64,
    pub fc1: u64,
    pub fc2: u64,
}

/// `c = a * b + beta * c` for strided row/column-major views.
#[allow(clippy::too_many_arguments)]
fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: &[f64],
    (rsa, csa): (usize, usize),
    b: &[f64],
    (rsb, csb): (usize, usize),
    beta: f64,
    c: &mut [f64],
    (rsc, csc): (usize, usize),
) {
    if m == 0 || n == 0 {
        return;
    }
    let last = |rows: usize, cols: usize, rs: usize, cs: usize| (rows - 1) * rs + (cols - 1) * cs;
    assert!(k == 0 || last(m, k, rsa, csa) < a.len(), "gemm: a out of bounds");
    assert!(k == 0 || last(k, n, rsb, csb) < b.len(), "gemm: b out of bounds");
    assert!(last(m, n, rsc, csc) < c.len(), "gemm: c out of bounds");
    // SAFETY: every index touched lies within the slices checked above, and
    // `c` does not alias `a` or `b` (distinct borrows).
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa as isize,
            csa as isize,
            b.as_ptr(),
            rsb as isize,
            csb as isize,
            beta,
            c.as_mut_ptr(),
            rsc as isize,
            csc as isize,
        );
    }
}

fn relu_in_place(v: &mut [f64]) {
    for x in v {
        if *x < 0.0 {
            *x = 0.0;
        }
    }
}

/// Intermediate activations of a batched forward pass.
struct Cache {
    batch: usize,
    /// conv1 patches, `(batch * side1^2) x n2^2`.
    p1: Vec<f64>,
    /// conv1 activations, `f1 x (batch * side1^2)`.
    a1: Vec<f64>,
    /// conv2 patches, `(batch * side2^2) x (f1 * n3^2)`.
    p2: Vec<f64>,
    /// conv2 activations flattened per sample, `batch x flat`.
    a2: Vec<f64>,
    /// fc1 activations, `batch x r1`.
    a3: Vec<f64>,
    /// Q-values, `batch x r2`.
    q: Vec<f64>,
}

fn forward_cache(w: &CnnWeights, inputs: &[&[f64]], counts: Option<&mut OpCounts>) -> Result<Cache> {
    let a = w.arch;
    let l = a.layout();
    let bsz = inputs.len();
    if bsz == 0 {
        return Err(Error::Structural("empty batch".into()));
    }
    for x in inputs {
        if x.len() != a.input_len() {
            return Err(Error::Structural(format!("input length {} != {}", x.len(), a.input_len())));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("non-finite network input".into()));
        }
    }
    let (s1, s2) = (a.conv1_side(), a.conv2_side());
    let (pos1, pos2) = (s1 * s1, s2 * s2);
    let k1 = a.n2 * a.n2;
    let k2 = a.f1 * a.n3 * a.n3;
    let flat = a.flat_len();

    let mut p1 = vec![0.0; bsz * pos1 * k1];
    for (b, x) in inputs.iter().enumerate() {
        for oi in 0..s1 {
            for oj in 0..s1 {
                let row = &mut p1[(b * pos1 + oi * s1 + oj) * k1..][..k1];
                for di in 0..a.n2 {
                    let src = &x[(oi + di) * a.n1 + oj..][..a.n2];
                    row[di * a.n2..(di + 1) * a.n2].copy_from_slice(src);
                }
            }
        }
    }
    let cols1 = bsz * pos1;
    let mut a1 = vec![0.0; a.f1 * cols1];
    gemm(a.f1, k1, cols1, w.section(l.conv1_w.clone()), (k1, 1), &p1, (1, k1), 0.0, &mut a1, (cols1, 1));
    for (c, bias) in w.section(l.conv1_b.clone()).iter().enumerate() {
        for v in &mut a1[c * cols1..(c + 1) * cols1] {
            *v += bias;
        }
    }
    relu_in_place(&mut a1);

    let n3sq = a.n3 * a.n3;
    let mut p2 = vec![0.0; bsz * pos2 * k2];
    for b in 0..bsz {
        for oi in 0..s2 {
            for oj in 0..s2 {
                let row = &mut p2[(b * pos2 + oi * s2 + oj) * k2..][..k2];
                for c in 0..a.f1 {
                    let chan = &a1[c * cols1 + b * pos1..][..pos1];
                    for di in 0..a.n3 {
                        let src = &chan[(oi + di) * s1 + oj..][..a.n3];
                        row[c * n3sq + di * a.n3..][..a.n3].copy_from_slice(src);
                    }
                }
            }
        }
    }
    let cols2 = bsz * pos2;
    let mut z2 = vec![0.0; a.f2 * cols2];
    gemm(a.f2, k2, cols2, w.section(l.conv2_w.clone()), (k2, 1), &p2, (1, k2), 0.0, &mut z2, (cols2, 1));
    let mut a2 = vec![0.0; bsz * flat];
    let b2 = w.section(l.conv2_b.clone());
    for c in 0..a.f2 {
        for b in 0..bsz {
            for p in 0..pos2 {
                a2[b * flat + c * pos2 + p] = (z2[c * cols2 + b * pos2 + p] + b2[c]).max(0.0);
            }
        }
    }

    let mut a3 = vec![0.0; bsz * a.r1];
    for row in a3.chunks_exact_mut(a.r1) {
        row.copy_from_slice(w.section(l.fc1_b.clone()));
    }
    gemm(bsz, flat, a.r1, &a2, (flat, 1), w.section(l.fc1_w.clone()), (1, flat), 1.0, &mut a3, (a.r1, 1));
    relu_in_place(&mut a3);

    let mut q = vec![0.0; bsz * a.r2];
    for row in q.chunks_exact_mut(a.r2) {
        row.copy_from_slice(w.section(l.fc2_b.clone()));
    }
    gemm(bsz, a.r1, a.r2, &a3, (a.r1, 1), w.section(l.fc2_w.clone()), (1, a.r1), 1.0, &mut q, (a.r2, 1));

    if let Some(c) = counts {
        c.conv1 += (a.f1 * k1 * cols1) as u64;
        c.conv2 += (a.f2 * k2 * cols2) as u64;
        c.fc1 += (bsz * flat * a.r1) as u64;
        c.fc2 += (bsz * a.r1 * a.r2) as u64;
    }
    Ok(Cache { batch: bsz, p1, a1, p2, a2, a3, q })
}

/// Q-values for one `n1 x n1` input (row-major).
pub fn forward(weights: &CnnWeights, input: &[f64]) -> Result<Vec<f64>> {
    Ok(forward_cache(weights, &[input], None)?.q)
}

/// As [`forward`], accumulating per-layer multiply counts into `counts`.
pub fn forward_counted(weights: &CnnWeights, input: &[f64], counts: &mut OpCounts) -> Result<Vec<f64>> {
    Ok(forward_cache(weights, &[input], Some(counts))?.q)
}

/// Q-values for a batch; one row of `r2` values per input.
pub fn forward_batch(weights: &CnnWeights, inputs: &[&[f64]]) -> Result<Vec<Vec<f64>>> {
    let r2 = weights.arch.r2;
    Ok(forward_cache(weights, inputs, None)?.q.chunks_exact(r2).map(<[f64]>::to_vec).collect())
}

/// One regression sample: only `q[action]` is pulled toward `target`.
#[derive(Clone, Copy, Debug)]
pub struct Sample<'a> {
    pub input: &'a [f64],
    pub action: usize,
    pub target: f64,
}

/// Mean squared error over the batch and its exact gradient with respect to
/// every parameter.
pub fn loss_and_gradients(weights: &CnnWeights, batch: &[Sample<'_>]) -> Result<(f64, CnnWeights)> {
    let a = weights.arch;
    for s in batch {
        if s.action >= a.r2 {
            return Err(Error::Structural(format!("action index {} >= {}", s.action, a.r2)));
        }
        if !s.target.is_finite() {
            return Err(Error::Numeric(format!("non-finite target {}", s.target)));
        }
    }
    let inputs: Vec<&[f64]> = batch.iter().map(|s| s.input).collect();
    let cache = forward_cache(weights, &inputs, None)?;
    let bsz = cache.batch;
    let l = a.layout();
    let (s1, s2) = (a.conv1_side(), a.conv2_side());
    let (pos1, pos2) = (s1 * s1, s2 * s2);
    let k1 = a.n2 * a.n2;
    let k2 = a.f1 * a.n3 * a.n3;
    let n3sq = a.n3 * a.n3;
    let flat = a.flat_len();
    let (cols1, cols2) = (bsz * pos1, bsz * pos2);

    let mut loss = 0.0;
    let mut dq = vec![0.0; bsz * a.r2];
    for (b, s) in batch.iter().enumerate() {
        let err = cache.q[b * a.r2 + s.action] - s.target;
        loss += err * err;
        dq[b * a.r2 + s.action] = 2.0 * err / bsz as f64;
    }
    loss /= bsz as f64;

    let mut g = CnnWeights::zeros(a);

    // fc2
    {
        let gb = g.section_mut(l.fc2_b.clone());
        for row in dq.chunks_exact(a.r2) {
            for (acc, v) in gb.iter_mut().zip(row) {
                *acc += v;
            }
        }
    }
    gemm(a.r2, bsz, a.r1, &dq, (1, a.r2), &cache.a3, (a.r1, 1), 0.0, g.section_mut(l.fc2_w.clone()), (a.r1, 1));
    let mut dz3 = vec![0.0; bsz * a.r1];
    gemm(bsz, a.r2, a.r1, &dq, (a.r2, 1), weights.section(l.fc2_w.clone()), (a.r1, 1), 0.0, &mut dz3, (a.r1, 1));
    for (d, act) in dz3.iter_mut().zip(&cache.a3) {
        if *act <= 0.0 {
            *d = 0.0;
        }
    }

    // fc1
    {
        let gb = g.section_mut(l.fc1_b.clone());
        for row in dz3.chunks_exact(a.r1) {
            for (acc, v) in gb.iter_mut().zip(row) {
                *acc += v;
            }
        }
    }
    gemm(a.r1, bsz, flat, &dz3, (1, a.r1), &cache.a2, (flat, 1), 0.0, g.section_mut(l.fc1_w.clone()), (flat, 1));
    let mut da2 = vec![0.0; bsz * flat];
    gemm(bsz, a.r1, flat, &dz3, (a.r1, 1), weights.section(l.fc1_w.clone()), (flat, 1), 0.0, &mut da2, (flat, 1));

    // conv2, back to the channel-major batch layout
    let mut dz2 = vec![0.0; a.f2 * cols2];
    for c in 0..a.f2 {
        for b in 0..bsz {
            for p in 0..pos2 {
                let idx = b * flat + c * pos2 + p;
                if cache.a2[idx] > 0.0 {
                    dz2[c * cols2 + b * pos2 + p] = da2[idx];
                }
            }
        }
    }
    {
        let gb = g.section_mut(l.conv2_b.clone());
        for (c, acc) in gb.iter_mut().enumerate() {
            *acc = dz2[c * cols2..(c + 1) * cols2].iter().sum();
        }
    }
    gemm(a.f2, cols2, k2, &dz2, (cols2, 1), &cache.p2, (k2, 1), 0.0, g.section_mut(l.conv2_w.clone()), (k2, 1));
    let mut dp2 = vec![0.0; cols2 * k2];
    gemm(cols2, a.f2, k2, &dz2, (1, cols2), weights.section(l.conv2_w.clone()), (k2, 1), 0.0, &mut dp2, (k2, 1));
    let mut dz1 = vec![0.0; a.f1 * cols1];
    for b in 0..bsz {
        for oi in 0..s2 {
            for oj in 0..s2 {
                let row = &dp2[(b * pos2 + oi * s2 + oj) * k2..][..k2];
                for c in 0..a.f1 {
                    let chan = &mut dz1[c * cols1 + b * pos1..][..pos1];
                    for di in 0..a.n3 {
                        let dst = &mut chan[(oi + di) * s1 + oj..][..a.n3];
                        for (d, v) in dst.iter_mut().zip(&row[c * n3sq + di * a.n3..][..a.n3]) {
                            *d += v;
                        }
                    }
                }
            }
        }
    }
    for (d, act) in dz1.iter_mut().zip(&cache.a1) {
        if *act <= 0.0 {
            *d = 0.0;
        }
    }

    // conv1
    {
        let gb = g.section_mut(l.conv1_b.clone());
        for (c, acc) in gb.iter_mut().enumerate() {
            *acc = dz1[c * cols1..(c + 1) * cols1].iter().sum();
        }
    }
    gemm(a.f1, cols1, k1, &dz1, (cols1, 1), &cache.p1, (k1, 1), 0.0, g.section_mut(l.conv1_w.clone()), (k1, 1));

    if !loss.is_finite() {
        return Err(Error::Numeric("non-finite loss".into()));
    }
    Ok((loss, g))
}

/// `w <- w - lr * g`, elementwise.
pub fn sgd_step(weights: &mut CnnWeights, gradients: &CnnWeights, learning_rate: f64) -> Result<()> {
    if weights.arch != gradients.arch {
        return Err(Error::Structural("gradient shape does not match weights".into()));
    }
    for (w, g) in weights.params.iter_mut().zip(&gradients.params) {
        *w -= learning_rate * g;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counting_input(a: &CnnArchitecture) -> Vec<f64> {
        (0..a.input_len()).map(|i| i as f64).collect()
    }

    #[test]
    fn shapes() {
        let a = CnnArchitecture::default();
        assert_eq!(a.conv1_side(), 7);
        assert_eq!(a.conv2_side(), 3);
        assert_eq!(a.flat_len(), 360);
        assert_eq!(a.param_count(), 20 * 36 + 20 + 40 * 20 * 25 + 40 + 360 * 1000 + 1000 + 1000 * 31 + 31);
        assert_eq!(a.conv2_multiplies(), 180_000);
    }

    #[test]
    fn zero_network_outputs_zero() {
        let a = CnnArchitecture::default();
        let q = forward(&CnnWeights::zeros(a), &counting_input(&a)).unwrap();
        assert_eq!(q.len(), 31);
        assert!(q.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn shape_mismatch_is_structural() {
        let a = CnnArchitecture::default();
        let err = forward(&CnnWeights::zeros(a), &[0.0; 10]).unwrap_err();
        assert!(matches!(err, Error::Structural(_)));
    }

    #[test]
    fn unit_kernel_copies_shifted_patch() {
        // Conv1 filter 0 has a single 1 at kernel offset (2, 3): its output at
        // (i, j) is input[i + 2][j + 3]. Conv2 filter 0 picks conv1 channel 0 at
        // offset (0, 0); fc1 unit 0 reads flat entry 0 (channel 0, position 0);
        // fc2 output 0 reads unit 0. So q[0] = input[2][3] = 2 * 12 + 3 = 27.
        let a = CnnArchitecture::default();
        let l = a.layout();
        let mut w = CnnWeights::zeros(a);
        w.section_mut(l.conv1_w.clone())[2 * a.n2 + 3] = 1.0;
        w.section_mut(l.conv2_w.clone())[0] = 1.0;
        w.section_mut(l.fc1_w.clone())[0] = 1.0;
        w.section_mut(l.fc2_w.clone())[0] = 1.0;
        let x = counting_input(&a);
        assert_eq!(forward(&w, &x).unwrap()[0], 27.0);
        // conv2 position (1, 2) is flat index 1 * 3 + 2 = 5 -> input[2 + 1][3 + 2].
        let mut w2 = w.clone();
        w2.section_mut(l.fc1_w.clone())[0] = 0.0;
        w2.section_mut(l.fc1_w.clone())[5] = 1.0;
        assert_eq!(forward(&w2, &x).unwrap()[0], (3 * 12 + 5) as f64);
    }

    #[test]
    fn doubling_head_doubles_output() {
        let a = CnnArchitecture::default();
        let mut s = RandomStream::new(3);
        let mut w = CnnWeights::init(a, &mut s);
        let x: Vec<f64> = (0..a.input_len()).map(|_| s.uniform()).collect();
        let q1 = forward(&w, &x).unwrap();
        for v in w.section_mut(a.layout().fc2_w) {
            *v *= 2.0;
        }
        let q2 = forward(&w, &x).unwrap();
        for (a, b) in q1.iter().zip(&q2) {
            assert!((2.0 * a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
    }

    #[test]
    fn init_statistics_and_determinism() {
        let a = CnnArchitecture::default();
        let w1 = CnnWeights::init(a, &mut RandomStream::new(9));
        let w2 = CnnWeights::init(a, &mut RandomStream::new(9));
        assert_eq!(w1, w2);
        let l = a.layout();
        for r in [l.conv1_b.clone(), l.conv2_b.clone(), l.fc1_b.clone(), l.fc2_b.clone()] {
            assert!(w1.section(r).iter().all(|&b| b == 0.0));
        }
        // 10^4 draws of the conv1 scale: conv1 itself only has 720 entries.
        let mut s = RandomStream::new(10);
        let mut sum = 0.0;
        let n = 10_000;
        for _ in 0..n / 720 + 1 {
            let w = CnnWeights::init(a, &mut s);
            sum += w.section(l.conv1_w.clone()).iter().map(|v| v * v).sum::<f64>();
        }
        let var = sum / ((n / 720 + 1) * 720) as f64;
        assert!((var / (2.0 / 36.0) - 1.0).abs() < 0.1, "var {var}");
    }

    #[test]
    fn perfect_fit_has_zero_gradient() {
        let a = CnnArchitecture::default();
        let mut s = RandomStream::new(4);
        let w = CnnWeights::init(a, &mut s);
        let x: Vec<f64> = (0..a.input_len()).map(|_| s.uniform()).collect();
        let q = forward(&w, &x).unwrap();
        let (loss, g) = loss_and_gradients(&w, &[Sample { input: &x, action: 4, target: q[4] }]).unwrap();
        assert_eq!(loss, 0.0);
        assert!(g.params().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn zero_network_quadratic() {
        let a = CnnArchitecture::default();
        let l = a.layout();
        let mut w = CnnWeights::zeros(a);
        let x = vec![0.5; a.input_len()];
        let (loss, g) = loss_and_gradients(&w, &[Sample { input: &x, action: 7, target: 1.0 }]).unwrap();
        assert_eq!(loss, 1.0);
        let gb = g.section(l.fc2_b.clone());
        for (i, v) in gb.iter().enumerate() {
            assert_eq!(*v, if i == 7 { -2.0 } else { 0.0 });
        }
        sgd_step(&mut w, &g, 0.1).unwrap();
        assert!((w.section(l.fc2_b.clone())[7] - 0.2).abs() < 1e-15);
    }

    #[test]
    fn sgd_zero_rate_is_identity_and_steps_do_not_commute() {
        let a = CnnArchitecture::default();
        let mut s = RandomStream::new(5);
        let w0 = CnnWeights::init(a, &mut s);
        let x: Vec<f64> = (0..a.input_len()).map(|_| s.uniform()).collect();
        let batch = [Sample { input: &x, action: 3, target: 2.0 }];
        let (_, g) = loss_and_gradients(&w0, &batch).unwrap();
        let mut w = w0.clone();
        sgd_step(&mut w, &g, 0.0).unwrap();
        assert_eq!(w, w0);

        let mut full = w0.clone();
        sgd_step(&mut full, &g, 0.01).unwrap();
        let mut halves = w0.clone();
        sgd_step(&mut halves, &g, 0.005).unwrap();
        let (_, g2) = loss_and_gradients(&halves, &batch).unwrap();
        sgd_step(&mut halves, &g2, 0.005).unwrap();
        assert_ne!(full, halves);
    }

    #[test]
    fn bad_batch_inputs() {
        let a = CnnArchitecture::default();
        let w = CnnWeights::zeros(a);
        let x = vec![0.0; a.input_len()];
        assert!(matches!(
            loss_and_gradients(&w, &[Sample { input: &x, action: 31, target: 0.0 }]),
            Err(Error::Structural(_))
        ));
        assert!(matches!(
            loss_and_gradients(&w, &[Sample { input: &x, action: 0, target: f64::NAN }]),
            Err(Error::Numeric(_))
        ));
        assert!(loss_and_gradients(&w, &[]).is_err());
    }

    #[test]
    fn batch_matches_single() {
        let a = CnnArchitecture::default();
        let mut s = RandomStream::new(6);
        let w = CnnWeights::init(a, &mut s);
        let xs: Vec<Vec<f64>> = (0..5).map(|_| (0..a.input_len()).map(|_| s.uniform()).collect()).collect();
        let refs: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
        let batch = forward_batch(&w, &refs).unwrap();
        for (x, q) in xs.iter().zip(&batch) {
            let single = forward(&w, x).unwrap();
            for (u, v) in single.iter().zip(q) {
                assert!((u - v).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn counted_forward_reports_conv2_multiplies() {
        let a = CnnArchitecture::default();
        let mut counts = OpCounts::default();
        forward_counted(&CnnWeights::zeros(a), &vec![0.0; 144], &mut counts).unwrap();
        assert_eq!(counts.conv2, 20 * 40 * 25 * 9);
    }
}
