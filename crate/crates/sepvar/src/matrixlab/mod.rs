//! Numerical certificates for the linear algebra behind the poset:
//! simplicity of matrix tuples, the intertwiner map and its rank data,
//! generic block constructions, the one-parameter degeneration, and
//! trace-word separation.
//!
//! All entries are complex doubles with independent standard-normal real
//! and imaginary parts, drawn from a seeded ChaCha stream; every
//! construction is deterministic per (operation, seed). Numerical rank
//! uses a relative singular-value threshold.

pub mod verify;

use nalgebra::{Complex, DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::combinatorics::{apply_sigma, Composition, Permutation};
use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// How many times a seeded construction redraws before giving up.
pub const RETRY_BUDGET: u32 = 32;

/// Relative threshold policy for numerical rank decisions: singular
/// values below `rel` times the largest one count as zero.
#[derive(Clone, Copy, Debug)]
pub struct Tolerance {
    pub rel: f64,
}

impl Tolerance {
    pub fn new(rel: f64) -> Result<Self> {
        if !rel.is_finite() || rel <= 0.0 {
            return Err(Error::param(format!(
                "tolerance must be a positive finite number, got {rel}"
            )));
        }
        Ok(Tolerance { rel })
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { rel: 1e-8 }
    }
}

/// An `n`-tuple of square `p x p` complex matrices.
#[derive(Clone, Debug)]
pub struct MatrixTuple {
    mats: Vec<DMatrix<C64>>,
}

impl MatrixTuple {
    pub fn new(mats: Vec<DMatrix<C64>>) -> Result<Self> {
        if mats.is_empty() {
            return Err(Error::param(
                "matrix tuple must contain at least one matrix",
            ));
        }
        let p = mats[0].nrows();
        if mats.iter().any(|m| m.nrows() != p || m.ncols() != p) {
            return Err(Error::param(
                "all matrices in a tuple must be square of the same size",
            ));
        }
        Ok(MatrixTuple { mats })
    }

    /// Number of matrices in the tuple.
    pub fn n(&self) -> usize {
        self.mats.len()
    }

    /// Side length of each matrix.
    pub fn p(&self) -> usize {
        self.mats[0].nrows()
    }

    pub fn matrices(&self) -> &[DMatrix<C64>] {
        &self.mats
    }

    /// The `k`-th matrix, 0-based.
    pub fn matrix(&self, k: usize) -> &DMatrix<C64> {
        &self.mats[k]
    }

    /// Frobenius norm over the whole tuple.
    pub fn norm(&self) -> f64 {
        self.mats
            .iter()
            .map(|m| m.norm_squared())
            .sum::<f64>()
            .sqrt()
    }

    /// Simultaneous conjugation `(g A_1 g^-1, ..., g A_n g^-1)`.
    pub fn conjugate_by(&self, g: &DMatrix<C64>) -> Result<MatrixTuple> {
        if g.nrows() != self.p() || g.ncols() != self.p() {
            return Err(Error::param("conjugating matrix has the wrong size"));
        }
        let g_inv = g
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::param("conjugating matrix is singular"))?;
        let mats = self.mats.iter().map(|m| g * m * &g_inv).collect();
        MatrixTuple::new(mats)
    }
}

/// A matrix tuple together with a block structure along a composition.
#[derive(Clone, Debug)]
pub struct BlockTuple {
    tuple: MatrixTuple,
    pi: Composition,
}

impl BlockTuple {
    pub fn new(tuple: MatrixTuple, pi: Composition) -> Result<Self> {
        if tuple.p() != pi.total() as usize {
            return Err(Error::param(format!(
                "matrix size {} does not match composition total {}",
                tuple.p(),
                pi.total()
            )));
        }
        Ok(BlockTuple { tuple, pi })
    }

    pub fn tuple(&self) -> &MatrixTuple {
        &self.tuple
    }

    pub fn pi(&self) -> &Composition {
        &self.pi
    }

    fn offsets(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.pi.rank());
        let mut acc = 0usize;
        for &s in self.pi.parts() {
            out.push(acc);
            acc += s as usize;
        }
        out
    }

    /// The `(i, j)` block of every matrix in the tuple, 1-based block
    /// indices.
    pub fn block(&self, i: usize, j: usize) -> Vec<DMatrix<C64>> {
        let offs = self.offsets();
        let (ri, ci) = (offs[i - 1], offs[j - 1]);
        let (rs, cs) = (
            self.pi.parts()[i - 1] as usize,
            self.pi.parts()[j - 1] as usize,
        );
        self.tuple
            .mats
            .iter()
            .map(|m| m.view((ri, ci), (rs, cs)).into_owned())
            .collect()
    }

    /// The `i`-th diagonal block as a square tuple, 1-based.
    pub fn diag_block(&self, i: usize) -> MatrixTuple {
        MatrixTuple::new(self.block(i, i)).expect("diagonal blocks are square")
    }

    /// Largest magnitude below the block diagonal.
    pub fn below_diagonal_magnitude(&self) -> f64 {
        let offs = self.offsets();
        let k = self.pi.rank();
        let mut max = 0.0f64;
        for i in 0..k {
            for j in 0..i {
                for m in &self.tuple.mats {
                    let v = m.view(
                        (offs[i], offs[j]),
                        (self.pi.parts()[i] as usize, self.pi.parts()[j] as usize),
                    );
                    for x in v.iter() {
                        max = max.max(x.norm());
                    }
                }
            }
        }
        max
    }

    /// Whether every block strictly below the diagonal is numerically
    /// zero relative to the tuple's scale.
    pub fn is_upper_triangular(&self, tol: Tolerance) -> bool {
        self.below_diagonal_magnitude() <= tol.rel * (1.0 + self.tuple.norm())
    }
}

fn draw_c64<R: Rng>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

fn draw_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<C64> {
    let mut data = Vec::with_capacity(rows * cols);
    for _ in 0..rows * cols {
        data.push(draw_c64(rng));
    }
    DMatrix::from_row_slice(rows, cols, &data)
}

fn draw_rect_tuple<R: Rng>(rng: &mut R, n: usize, rows: usize, cols: usize) -> Vec<DMatrix<C64>> {
    (0..n).map(|_| draw_matrix(rng, rows, cols)).collect()
}

fn draw_tuple<R: Rng>(rng: &mut R, n: usize, p: usize) -> MatrixTuple {
    MatrixTuple::new(draw_rect_tuple(rng, n, p, p)).expect("square draws")
}

/// A reproducible random tuple: entries have independent standard-normal
/// real and imaginary parts.
pub fn random_tuple(n: usize, p: usize, seed: u64) -> Result<MatrixTuple> {
    if n == 0 || p == 0 {
        return Err(Error::param("random tuple requires n >= 1 and p >= 1"));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    Ok(draw_tuple(&mut rng, n, p))
}

/// Numerical rank: the number of singular values above `rel` times the
/// largest one.
pub fn numerical_rank(m: &DMatrix<C64>, tol: Tolerance) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0f64, f64::max);
    if max <= 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol.rel * max).count()
}

fn vectorize(m: &DMatrix<C64>) -> DVector<C64> {
    DVector::from_column_slice(m.as_slice())
}

fn stacked_vec(mats: &[DMatrix<C64>]) -> DVector<C64> {
    let mut data = Vec::new();
    for m in mats {
        data.extend_from_slice(m.as_slice());
    }
    DVector::from_vec(data)
}

/// Whether the tuple leaves no proper nonzero subspace invariant, tested
/// by closing the span of words in the matrices: starting from the
/// identity, left-multiply by each generator until the span stops
/// growing. The span is closed after at most `p^2` rounds, so only words
/// of length up to `p^2` are ever formed; the tuple is simple iff the
/// span reaches the full matrix space.
pub fn is_simple(a: &MatrixTuple, tol: Tolerance) -> bool {
    let p = a.p();
    let d = p * p;
    if p == 1 {
        return true;
    }
    let mut basis: Vec<DVector<C64>> = Vec::with_capacity(d);
    let mut frontier: Vec<DMatrix<C64>> = Vec::new();
    absorb(
        &mut basis,
        &mut frontier,
        DMatrix::<C64>::identity(p, p),
        tol,
    );
    while !frontier.is_empty() && basis.len() < d {
        let current = std::mem::take(&mut frontier);
        for m in &current {
            for ak in a.matrices() {
                if basis.len() >= d {
                    break;
                }
                absorb(&mut basis, &mut frontier, ak * m, tol);
            }
        }
    }
    basis.len() == d
}

fn absorb(
    basis: &mut Vec<DVector<C64>>,
    frontier: &mut Vec<DMatrix<C64>>,
    m: DMatrix<C64>,
    tol: Tolerance,
) {
    let p = m.nrows();
    let mut v = vectorize(&m);
    let scale = v.norm();
    if scale <= 0.0 {
        return;
    }
    // Two orthogonalization passes keep the basis numerically orthonormal.
    for _ in 0..2 {
        for b in basis.iter() {
            let c = b.dotc(&v);
            v -= b * c;
        }
    }
    let residual = v.norm();
    if residual > tol.rel * scale {
        v /= C64::new(residual, 0.0);
        frontier.push(DMatrix::from_column_slice(p, p, v.as_slice()));
        basis.push(v);
    }
}

/// Matrix of the intertwiner map `X -> (B_i X - X B'_i)_i` on
/// `p1 x p2` matrices, stacked over the `n` coordinates in column-major
/// vectorization. Its kernel is the space of homomorphisms from the
/// second tuple to the first; its cokernel measures nontrivial
/// extensions.
#[derive(Clone, Debug)]
pub struct DMapMatrix {
    matrix: DMatrix<C64>,
    n: usize,
    p1: usize,
    p2: usize,
}

impl DMapMatrix {
    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn rows(&self) -> usize {
        self.n * self.p1 * self.p2
    }

    pub fn cols(&self) -> usize {
        self.p1 * self.p2
    }

    pub fn rank(&self, tol: Tolerance) -> usize {
        numerical_rank(&self.matrix, tol)
    }

    /// Dimension of the homomorphism space (the nullity).
    pub fn hom_dim(&self, tol: Tolerance) -> usize {
        self.cols() - self.rank(tol)
    }

    /// Dimension of the space of extension classes (the cokernel).
    pub fn ext_dim(&self, tol: Tolerance) -> usize {
        self.rows() - self.rank(tol)
    }
}

/// Build the intertwiner matrix for tuples of sizes `p1` and `p2`.
pub fn d_matrix(b: &MatrixTuple, bp: &MatrixTuple) -> Result<DMapMatrix> {
    if b.n() != bp.n() {
        return Err(Error::param(format!(
            "tuples of different lengths: {} vs {}",
            b.n(),
            bp.n()
        )));
    }
    let (n, p1, p2) = (b.n(), b.p(), bp.p());
    let d = p1 * p2;
    let id1 = DMatrix::<C64>::identity(p1, p1);
    let id2 = DMatrix::<C64>::identity(p2, p2);
    let mut matrix = DMatrix::<C64>::zeros(n * d, d);
    for k in 0..n {
        // vec(B X - X B') = (I (x) B - B'^T (x) I) vec(X), column-major.
        let block = id2.kronecker(b.matrix(k)) - bp.matrix(k).transpose().kronecker(&id1);
        matrix.view_mut((k * d, 0), (d, d)).copy_from(&block);
    }
    Ok(DMapMatrix { matrix, n, p1, p2 })
}

fn validate_rect(
    what: &str,
    mats: &[DMatrix<C64>],
    n: usize,
    rows: usize,
    cols: usize,
) -> Result<()> {
    if mats.len() != n {
        return Err(Error::param(format!(
            "{what} must have {n} coordinates, got {}",
            mats.len()
        )));
    }
    if mats.iter().any(|m| m.nrows() != rows || m.ncols() != cols) {
        return Err(Error::param(format!(
            "{what} blocks must all be {rows} x {cols}"
        )));
    }
    Ok(())
}

/// Whether some nontrivial linear combination of the two off-diagonal
/// blocks lies in the image of the intertwiner map of the diagonal
/// blocks: numerically, the rank of `[D | vec(C) | vec(C')]` is strictly
/// below `rank(D) + 2`. For scalar diagonal blocks and `n = 2` this is
/// the statement that three vectors in the plane are dependent, hence
/// always true.
pub fn rank_condition(
    b11: &MatrixTuple,
    b22: &MatrixTuple,
    c: &[DMatrix<C64>],
    cp: &[DMatrix<C64>],
    tol: Tolerance,
) -> Result<bool> {
    let d = d_matrix(b11, b22)?;
    let (n, p1, p2) = (d.n, d.p1, d.p2);
    validate_rect("first off-diagonal tuple", c, n, p1, p2)?;
    validate_rect("second off-diagonal tuple", cp, n, p1, p2)?;
    let rank_d = d.rank(tol);
    let mut aug = DMatrix::<C64>::zeros(d.rows(), d.cols() + 2);
    aug.view_mut((0, 0), (d.rows(), d.cols()))
        .copy_from(&d.matrix);
    aug.set_column(d.cols(), &stacked_vec(c));
    aug.set_column(d.cols() + 1, &stacked_vec(cp));
    Ok(numerical_rank(&aug, tol) < rank_d + 2)
}

fn draw_simple<R: Rng>(rng: &mut R, n: usize, p: usize, tol: Tolerance) -> Option<MatrixTuple> {
    for _ in 0..8 {
        let t = draw_tuple(rng, n, p);
        if is_simple(&t, tol) {
            return Some(t);
        }
    }
    None
}

/// Short trace fingerprint used to certify non-isomorphism of equal-size
/// simple tuples: words of length at most 2.
fn fingerprint(t: &MatrixTuple) -> Vec<C64> {
    let mut out = Vec::new();
    for a in t.matrices() {
        out.push(a.trace());
    }
    for a in t.matrices() {
        for b in t.matrices() {
            out.push((a * b).trace());
        }
    }
    out
}

fn fingerprints_collide(a: &MatrixTuple, b: &MatrixTuple, tol: Tolerance) -> bool {
    let fa = fingerprint(a);
    let fb = fingerprint(b);
    let scale = 1.0 + fa.iter().chain(&fb).map(|z| z.norm()).fold(0.0, f64::max);
    fa.iter()
        .zip(&fb)
        .all(|(x, y)| (x - y).norm() <= tol.rel * scale)
}

fn draw_pairwise_distinct_simples<R: Rng>(
    rng: &mut R,
    parts: &[u32],
    n: usize,
    tol: Tolerance,
) -> Option<Vec<MatrixTuple>> {
    let mut diag = Vec::with_capacity(parts.len());
    for &s in parts {
        diag.push(draw_simple(rng, n, s as usize, tol)?);
    }
    for i in 0..diag.len() {
        for j in i + 1..diag.len() {
            if diag[i].p() == diag[j].p() && fingerprints_collide(&diag[i], &diag[j], tol) {
                return None;
            }
        }
    }
    Some(diag)
}

/// Draw an off-diagonal tuple outside the image of the given intertwiner
/// map, certifying a nontrivial extension.
fn draw_nonsplit_block<R: Rng>(
    rng: &mut R,
    d: &DMapMatrix,
    tol: Tolerance,
) -> Option<Vec<DMatrix<C64>>> {
    let rank_d = d.rank(tol);
    for _ in 0..4 {
        let c = draw_rect_tuple(rng, d.n, d.p1, d.p2);
        let mut aug = DMatrix::<C64>::zeros(d.rows(), d.cols() + 1);
        aug.view_mut((0, 0), (d.rows(), d.cols()))
            .copy_from(&d.matrix);
        aug.set_column(d.cols(), &stacked_vec(&c));
        if numerical_rank(&aug, tol) == rank_d + 1 {
            return Some(c);
        }
    }
    None
}

fn assemble_upper<R: Rng>(
    rng: &mut R,
    pi: &Composition,
    n: usize,
    diag: &[MatrixTuple],
    supers: &[Vec<DMatrix<C64>>],
) -> BlockTuple {
    let p = pi.total() as usize;
    let k = pi.rank();
    let mut offs = Vec::with_capacity(k);
    let mut acc = 0usize;
    for &s in pi.parts() {
        offs.push(acc);
        acc += s as usize;
    }
    let mut mats = vec![DMatrix::<C64>::zeros(p, p); n];
    for (i, b) in diag.iter().enumerate() {
        for (m, src) in mats.iter_mut().zip(b.matrices()) {
            m.view_mut((offs[i], offs[i]), (src.nrows(), src.ncols()))
                .copy_from(src);
        }
    }
    for (l, c) in supers.iter().enumerate() {
        for (m, src) in mats.iter_mut().zip(c) {
            m.view_mut((offs[l], offs[l + 1]), (src.nrows(), src.ncols()))
                .copy_from(src);
        }
    }
    for i in 0..k {
        for j in i + 2..k {
            let (rs, cs) = (pi.parts()[i] as usize, pi.parts()[j] as usize);
            for m in mats.iter_mut() {
                let block = draw_matrix(rng, rs, cs);
                m.view_mut((offs[i], offs[j]), (rs, cs)).copy_from(&block);
            }
        }
    }
    BlockTuple::new(MatrixTuple::new(mats).expect("assembled"), pi.clone()).expect("sizes agree")
}

fn try_max_general<R: Rng>(
    rng: &mut R,
    pi: &Composition,
    n: usize,
    tol: Tolerance,
) -> Option<BlockTuple> {
    let diag = draw_pairwise_distinct_simples(rng, pi.parts(), n, tol)?;
    let k = pi.rank();
    let mut supers = Vec::with_capacity(k.saturating_sub(1));
    for l in 0..k.saturating_sub(1) {
        let d = d_matrix(&diag[l], &diag[l + 1]).expect("matching n");
        supers.push(draw_nonsplit_block(rng, &d, tol)?);
    }
    Some(assemble_upper(rng, pi, n, &diag, &supers))
}

/// A block-upper-triangular tuple whose diagonal blocks are simple and
/// pairwise non-isomorphic, and whose superdiagonal blocks define
/// nontrivial extensions of the adjacent diagonal blocks. Remaining upper
/// blocks are random.
pub fn construct_max_general(
    pi: &Composition,
    n: usize,
    seed: u64,
    tol: Tolerance,
) -> Result<BlockTuple> {
    if n < 2 {
        return Err(Error::param("maximally general tuples require n >= 2"));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    for _ in 0..RETRY_BUDGET {
        if let Some(bt) = try_max_general(&mut rng, pi, n, tol) {
            return Ok(bt);
        }
    }
    Err(Error::ResamplingFailed {
        what: format!("maximally general tuple for {}", pi.label()),
        seed,
        attempts: RETRY_BUDGET,
    })
}

/// Build a pair in the variety indexed by `(pi, sigma)`: the first tuple
/// is block-upper-triangular for `pi`, the second for the permuted
/// structure in which diagonal block `i` of the first sits at block
/// position `sigma(i)` (so the second tuple's parts are
/// `sigma^{-1}`-permuted).
///
/// With `supermaximal` set, both tuples are maximally general, and at
/// every position `l` with `sigma(l+1) = sigma(l) + 1` the two
/// superdiagonal blocks sitting over the shared diagonal pair --
/// block `(l, l+1)` of the first tuple and block
/// `(sigma(l), sigma(l)+1)` of the second -- must fail the rank
/// condition (the certificate that the pair does not degenerate to the
/// one-block element there). For `n = 2`, positions with
/// `p_l = p_{l+1} = 1` are exempt: the rank condition is vacuous there.
pub fn construct_pair(
    pi: &Composition,
    sigma: &Permutation,
    n: usize,
    seed: u64,
    supermaximal: bool,
    tol: Tolerance,
) -> Result<(BlockTuple, BlockTuple)> {
    if sigma.degree() != pi.rank() {
        return Err(Error::param(format!(
            "permutation degree {} does not match composition rank {}",
            sigma.degree(),
            pi.rank()
        )));
    }
    if n == 0 || (supermaximal && n < 2) {
        return Err(Error::param(
            "pair construction requires n >= 1, and n >= 2 when supermaximal",
        ));
    }
    let sigma_inv = sigma.inverse();
    let permuted_pi = apply_sigma(&sigma_inv, pi)?;
    let k = pi.rank();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);

    'attempt: for _ in 0..RETRY_BUDGET {
        let diag: Vec<MatrixTuple> = if supermaximal {
            match draw_pairwise_distinct_simples(&mut rng, pi.parts(), n, tol) {
                Some(d) => d,
                None => continue 'attempt,
            }
        } else {
            pi.parts()
                .iter()
                .map(|&s| draw_tuple(&mut rng, n, s as usize))
                .collect()
        };
        // Block j of the second tuple is block sigma^{-1}(j) of the first.
        let diag_prime: Vec<MatrixTuple> = (1..=k)
            .map(|j| diag[sigma_inv.image(j) as usize - 1].clone())
            .collect();

        let mut supers_a = Vec::with_capacity(k.saturating_sub(1));
        let mut supers_b = Vec::with_capacity(k.saturating_sub(1));
        for l in 0..k.saturating_sub(1) {
            if supermaximal {
                let da = d_matrix(&diag[l], &diag[l + 1]).expect("matching n");
                let db = d_matrix(&diag_prime[l], &diag_prime[l + 1]).expect("matching n");
                match (
                    draw_nonsplit_block(&mut rng, &da, tol),
                    draw_nonsplit_block(&mut rng, &db, tol),
                ) {
                    (Some(ca), Some(cb)) => {
                        supers_a.push(ca);
                        supers_b.push(cb);
                    }
                    _ => continue 'attempt,
                }
            } else {
                supers_a.push(draw_rect_tuple(
                    &mut rng,
                    n,
                    pi.parts()[l] as usize,
                    pi.parts()[l + 1] as usize,
                ));
                supers_b.push(draw_rect_tuple(
                    &mut rng,
                    n,
                    permuted_pi.parts()[l] as usize,
                    permuted_pi.parts()[l + 1] as usize,
                ));
            }
        }

        let a = assemble_upper(&mut rng, pi, n, &diag, &supers_a);
        let b = assemble_upper(&mut rng, &permuted_pi, n, &diag_prime, &supers_b);

        if supermaximal {
            for l in 1..k {
                if sigma.image(l + 1) != sigma.image(l) + 1 {
                    continue;
                }
                let (s1, s2) = (pi.parts()[l - 1], pi.parts()[l]);
                if n == 2 && s1 == 1 && s2 == 1 {
                    continue; // rank condition is vacuous here
                }
                let j = sigma.image(l) as usize;
                let passes = rank_condition(
                    &diag[l - 1],
                    &diag[l],
                    &a.block(l, l + 1),
                    &b.block(j, j + 1),
                    tol,
                )?;
                if passes {
                    continue 'attempt;
                }
            }
        }
        return Ok((a, b));
    }
    Err(Error::ResamplingFailed {
        what: format!("pair for ({}, {})", pi.label(), sigma.one_line()),
        seed,
        attempts: RETRY_BUDGET,
    })
}

/// The 0/1 block permutation matrix with rows partitioned by `pi`,
/// columns by the `sigma`-permuted structure, and the identity block
/// `I_{p_i}` in block row `i`, block column `sigma(i)`. It is
/// orthogonal, and conjugation by it carries a tuple whose block
/// `sigma(i)` matches block `i` of a `pi`-partitioned tuple back into
/// `pi` order.
#[derive(Clone, Debug)]
pub struct ScramblePermMatrix {
    matrix: DMatrix<C64>,
    pi: Composition,
    sigma: Permutation,
}

impl ScramblePermMatrix {
    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn pi(&self) -> &Composition {
        &self.pi
    }

    pub fn sigma(&self) -> &Permutation {
        &self.sigma
    }

    /// Conjugate every matrix of the tuple: `S A_i S^T`.
    pub fn conjugate(&self, t: &MatrixTuple) -> Result<MatrixTuple> {
        if t.p() != self.matrix.nrows() {
            return Err(Error::param("tuple size does not match the block matrix"));
        }
        let st = self.matrix.transpose();
        MatrixTuple::new(
            t.matrices()
                .iter()
                .map(|m| &self.matrix * m * &st)
                .collect(),
        )
    }
}

pub fn scramble_matrix(pi: &Composition, sigma: &Permutation) -> Result<ScramblePermMatrix> {
    if sigma.degree() != pi.rank() {
        return Err(Error::param(format!(
            "permutation degree {} does not match composition rank {}",
            sigma.degree(),
            pi.rank()
        )));
    }
    let p = pi.total() as usize;
    let k = pi.rank();
    let permuted_pi = apply_sigma(&sigma.inverse(), pi)?;
    let row_offs = {
        let mut v = Vec::with_capacity(k);
        let mut acc = 0usize;
        for &s in pi.parts() {
            v.push(acc);
            acc += s as usize;
        }
        v
    };
    let col_offs = {
        let mut v = Vec::with_capacity(k);
        let mut acc = 0usize;
        for &s in permuted_pi.parts() {
            v.push(acc);
            acc += s as usize;
        }
        v
    };
    let mut m = DMatrix::<C64>::zeros(p, p);
    for i in 1..=k {
        let j = sigma.image(i) as usize;
        let size = pi.parts()[i - 1] as usize;
        debug_assert_eq!(size, permuted_pi.parts()[j - 1] as usize);
        for r in 0..size {
            m[(row_offs[i - 1] + r, col_offs[j - 1] + r)] = C64::new(1.0, 0.0);
        }
    }
    Ok(ScramblePermMatrix {
        matrix: m,
        pi: pi.clone(),
        sigma: sigma.clone(),
    })
}

/// Residuals of the one-parameter degeneration for a two-block swap
/// pair: with `g(t) = diag(t I, I)`, reinserting the second tuple's
/// off-diagonal block scaled by `t` below the diagonal of the first and
/// conjugating must converge to the scrambled second tuple. The residual
/// is exactly linear in `t`, so the ratios `r(t)/t` are constant up to
/// floating-point error.
pub fn degeneration_check(
    a: &BlockTuple,
    ap: &BlockTuple,
    t_values: &[f64],
    tol: Tolerance,
) -> Result<Vec<f64>> {
    if a.pi().rank() != 2 || ap.pi().rank() != 2 {
        return Err(Error::param("degeneration requires two-block tuples"));
    }
    let (p1, p2) = (a.pi().parts()[0] as usize, a.pi().parts()[1] as usize);
    if ap.pi().parts() != [p2 as u32, p1 as u32] {
        return Err(Error::param(
            "second tuple must be partitioned by the swapped composition",
        ));
    }
    if a.tuple().n() != ap.tuple().n() {
        return Err(Error::param("tuples of different lengths"));
    }
    let scale = 1.0 + a.tuple().norm().max(ap.tuple().norm());
    if !a.is_upper_triangular(tol) || !ap.is_upper_triangular(tol) {
        return Err(Error::param("both tuples must be block upper triangular"));
    }
    let mismatch = |x: &[DMatrix<C64>], y: &[DMatrix<C64>]| -> f64 {
        x.iter()
            .zip(y)
            .map(|(u, v)| (u - v).norm_squared())
            .sum::<f64>()
            .sqrt()
    };
    if mismatch(&a.block(1, 1), &ap.block(2, 2)) > tol.rel * scale
        || mismatch(&a.block(2, 2), &ap.block(1, 1)) > tol.rel * scale
    {
        return Err(Error::param("diagonal blocks do not match after the swap"));
    }
    if t_values.iter().any(|&t| !t.is_finite() || t <= 0.0) {
        return Err(Error::param("t values must be positive and finite"));
    }

    let swap = Permutation::new(vec![2, 1]).expect("transposition");
    let s = scramble_matrix(a.pi(), &swap)?;
    let target = s.conjugate(ap.tuple())?;
    let p = a.tuple().p();
    let bp12 = ap.block(1, 2);

    let mut out = Vec::with_capacity(t_values.len());
    for &t in t_values {
        let mut residual_sq = 0.0f64;
        for (idx, m) in a.tuple().matrices().iter().enumerate() {
            let mut mt = m.clone();
            let scaled = &bp12[idx] * C64::new(t, 0.0);
            mt.view_mut((p1, 0), (p2, p1)).copy_from(&scaled);
            // Conjugation by diag(t I, I) scales block (r, c) by t^(top
            // rows) / t^(left cols).
            for r in 0..p {
                for c in 0..p {
                    let num = if r < p1 { t } else { 1.0 };
                    let den = if c < p1 { t } else { 1.0 };
                    mt[(r, c)] *= C64::new(num / den, 0.0);
                }
            }
            residual_sq += (&mt - target.matrix(idx)).norm_squared();
        }
        out.push(residual_sq.sqrt());
    }
    Ok(out)
}

/// Trace of the product of the tuple's matrices in word order; indices
/// are 1-based.
pub fn trace_word(a: &MatrixTuple, word: &[usize]) -> Result<C64> {
    if word.is_empty() {
        return Err(Error::param("trace word must be nonempty"));
    }
    if word.iter().any(|&i| i == 0 || i > a.n()) {
        return Err(Error::param(format!(
            "word indices must lie in 1..={}, got {word:?}",
            a.n()
        )));
    }
    let mut prod = a.matrix(word[0] - 1).clone();
    for &i in &word[1..] {
        prod *= a.matrix(i - 1);
    }
    Ok(prod.trace())
}

/// Budget guard for trace-word enumeration.
const WORD_BUDGET: u128 = 4_000_000;

/// One representative (the lexicographically smallest rotation) per
/// cyclic class of words over `{1..n}` of length 1..=`max_len`.
pub fn cyclic_word_representatives(n: usize, max_len: usize) -> Result<Vec<Vec<usize>>> {
    if n == 0 || max_len == 0 {
        return Err(Error::param("need n >= 1 and max_len >= 1"));
    }
    let mut cost: u128 = 0;
    let mut pow: u128 = 1;
    for r in 1..=max_len as u128 {
        pow = pow.saturating_mul(n as u128);
        cost = cost.saturating_add(pow.saturating_mul(r));
    }
    if cost > WORD_BUDGET {
        return Err(Error::param(format!(
            "word enumeration budget exceeded: {cost} > {WORD_BUDGET} (n={n}, max_len={max_len})"
        )));
    }
    let mut out = Vec::new();
    let mut word = Vec::new();
    for len in 1..=max_len {
        word.clear();
        word.resize(len, 1usize);
        loop {
            if is_minimal_rotation(&word) {
                out.push(word.clone());
            }
            // Odometer step in base n, most significant first.
            let mut pos = len;
            loop {
                if pos == 0 {
                    break;
                }
                if word[pos - 1] < n {
                    word[pos - 1] += 1;
                    break;
                }
                word[pos - 1] = 1;
                pos -= 1;
            }
            if pos == 0 {
                break;
            }
        }
    }
    Ok(out)
}

fn is_minimal_rotation(word: &[usize]) -> bool {
    let len = word.len();
    for shift in 1..len {
        for i in 0..len {
            let rotated = word[(i + shift) % len];
            match rotated.cmp(&word[i]) {
                std::cmp::Ordering::Less => return false,
                std::cmp::Ordering::Greater => break,
                std::cmp::Ordering::Equal => {}
            }
        }
    }
    true
}

/// Largest absolute difference of trace words of length at most
/// `max_len`, one representative per cyclic class. A truncation
/// heuristic: agreement at finite length does not certify agreement of
/// all trace invariants.
pub fn trace_discrepancy(a: &MatrixTuple, ap: &MatrixTuple, max_len: usize) -> Result<f64> {
    if a.n() != ap.n() || a.p() != ap.p() {
        return Err(Error::param("tuples must have the same shape"));
    }
    let mut max = 0.0f64;
    for w in cyclic_word_representatives(a.n(), max_len)? {
        let d = (trace_word(a, &w)? - trace_word(ap, &w)?).norm();
        max = max.max(d);
    }
    Ok(max)
}

/// Scale against which trace discrepancies are judged: the largest trace
/// magnitude over both tuples, floored at 1.
pub fn trace_scale(a: &MatrixTuple, ap: &MatrixTuple, max_len: usize) -> Result<f64> {
    if a.n() != ap.n() || a.p() != ap.p() {
        return Err(Error::param("tuples must have the same shape"));
    }
    let mut max = 1.0f64;
    for w in cyclic_word_representatives(a.n(), max_len)? {
        max = max.max(trace_word(a, &w)?.norm());
        max = max.max(trace_word(ap, &w)?.norm());
    }
    Ok(max)
}
