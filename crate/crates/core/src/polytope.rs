//! Polytope data model: vertex sets, vertex–facet incidences, slack
//! matrices, bordered Gram matrices, and the geometric routines that move
//! between them.
//!
//! Facets are always written in the form `1 - hᵀx ≥ 0`, i.e. with the
//! origin in the interior, so a slack matrix is `S = 1 - VᵀH`.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::numerics;

/// Relative threshold below which a slack entry counts as zero.
pub const EPS_ZERO: f64 = 1e-7;
/// Absolute side tolerance for facet enumeration on exact inputs.
pub const EPS_SIDE: f64 = 1e-9;
/// Default residual tolerance for facet fits in [`verify_inscription`].
pub const TOL_FIT: f64 = 1e-6;
/// Default minimum slack of non-incident vertices in [`verify_inscription`].
pub const TOL_SIDE: f64 = 1e-6;
/// Unit-norm tolerance for inscriptions.
pub const UNIT_NORM_TOL: f64 = 1e-9;

const MAX_RESAMPLES: usize = 100;

/// `n` points in `R^d` that affinely span the whole space.
#[derive(Debug, Clone, PartialEq)]
pub struct PolytopeVRep {
    /// `d × n`, one vertex per column.
    vertices: DMatrix<f64>,
}

impl PolytopeVRep {
    pub fn new(dim: usize, vertices: &[Vec<f64>]) -> Result<Self> {
        if let Some((i, v)) = vertices.iter().enumerate().find(|(_, v)| v.len() != dim) {
            return Err(Error::DimensionMismatch(format!(
                "vertex {i} has {} coordinates, expected {dim}",
                v.len()
            )));
        }
        let mat = DMatrix::from_fn(dim, vertices.len(), |r, c| vertices[c][r]);
        Self::from_matrix(mat)
    }

    /// Builds from a `d × n` matrix of column vertices.
    pub fn from_matrix(vertices: DMatrix<f64>) -> Result<Self> {
        let (d, n) = vertices.shape();
        if d < 2 {
            return Err(Error::Precondition(format!("dimension {d} < 2")));
        }
        if n < d + 1 {
            return Err(Error::Precondition(format!(
                "{n} vertices cannot span dimension {d}"
            )));
        }
        numerics::check_finite(&vertices)?;
        let lifted = DMatrix::from_fn(d + 1, n, |r, c| if r == 0 { 1.0 } else { vertices[(r - 1, c)] });
        if numerics::numeric_rank(&lifted, 1e-9)? != d + 1 {
            return Err(Error::NotFullDimensional);
        }
        Ok(Self { vertices })
    }

    pub fn dim(&self) -> usize {
        self.vertices.nrows()
    }

    pub fn len(&self) -> usize {
        self.vertices.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.ncols() == 0
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> DVector<f64> {
        self.vertices.column(i).into_owned()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.vertices
            .column_iter()
            .map(|c| c.iter().copied().collect())
            .collect()
    }

    /// Largest deviation of a vertex norm from 1.
    pub fn sphere_deviation(&self) -> f64 {
        self.vertices
            .column_iter()
            .map(|c| (c.norm() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Vertex Gram matrix `VᵀV`.
    pub fn gram(&self) -> DMatrix<f64> {
        self.vertices.transpose() * &self.vertices
    }
}

/// Which vertex lies on which facet: `on_facet(i, j)` iff `(i, j) ∈ I^z`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FacetIncidence {
    n: usize,
    m: usize,
    /// Row-major `n × m`.
    on_facet: Vec<bool>,
}

impl FacetIncidence {
    /// Builds and validates an incidence for a `d`-polytope.
    pub fn new(n: usize, m: usize, on_facet: Vec<bool>, d: usize) -> Result<Self> {
        if on_facet.len() != n * m {
            return Err(Error::LengthMismatch {
                expected: n * m,
                got: on_facet.len(),
            });
        }
        let inc = Self { n, m, on_facet };
        inc.validate(d)?;
        Ok(inc)
    }

    /// Builds from a list of facets, each given by its vertex indices.
    pub fn from_facets(n: usize, facets: &[Vec<usize>], d: usize) -> Result<Self> {
        let m = facets.len();
        let mut on_facet = vec![false; n * m];
        for (j, facet) in facets.iter().enumerate() {
            for &i in facet {
                if i >= n {
                    return Err(Error::DimensionMismatch(format!(
                        "facet {j} references vertex {i} but there are only {n} vertices"
                    )));
                }
                on_facet[i * m + j] = true;
            }
        }
        Self::new(n, m, on_facet, d)
    }

    fn validate(&self, d: usize) -> Result<()> {
        for j in 0..self.m {
            let k = self.facet_size(j);
            if k < d {
                return Err(Error::DegenerateIncidence(format!(
                    "facet {j} has {k} vertices, fewer than {d}"
                )));
            }
        }
        if self.m > 0 {
            for i in 0..self.n {
                let k = (0..self.m).filter(|&j| self.is_on(i, j)).count();
                if k < d {
                    return Err(Error::DegenerateIncidence(format!(
                        "vertex {i} lies on {k} facets, fewer than {d}"
                    )));
                }
            }
        }
        for a in 0..self.m {
            for b in (a + 1)..self.m {
                if (0..self.n).all(|i| self.is_on(i, a) == self.is_on(i, b)) {
                    return Err(Error::DegenerateIncidence(format!(
                        "facets {a} and {b} have identical vertex sets"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn is_on(&self, vertex: usize, facet: usize) -> bool {
        self.on_facet[vertex * self.m + facet]
    }

    pub fn facet_size(&self, facet: usize) -> usize {
        (0..self.n).filter(|&i| self.is_on(i, facet)).count()
    }

    pub fn facet_vertices(&self, facet: usize) -> Vec<usize> {
        (0..self.n).filter(|&i| self.is_on(i, facet)).collect()
    }

    pub fn facets(&self) -> Vec<Vec<usize>> {
        (0..self.m).map(|j| self.facet_vertices(j)).collect()
    }

    /// Zero positions `(i, j)` in row-major order; this fixes the indexing of
    /// the dual vector `w`.
    pub fn zero_positions(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in 0..self.m {
                if self.is_on(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn zero_count(&self) -> usize {
        self.on_facet.iter().filter(|&&b| b).count()
    }

    /// The common facet size, if every facet has the same number of vertices.
    pub fn uniform_facet_size(&self) -> Option<usize> {
        if self.m == 0 {
            return None;
        }
        let k = self.facet_size(0);
        (1..self.m).all(|j| self.facet_size(j) == k).then_some(k)
    }
}

/// A nonnegative slack matrix together with its zero pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct SlackMatrix {
    pub entries: DMatrix<f64>,
    pub zero_set: FacetIncidence,
}

/// `S_ij = 1 - h_jᵀ v_i`. Entries within `eps_zero` (relative) of zero are
/// snapped to exactly zero and define the zero set.
pub fn slack_from_reps(
    v: &PolytopeVRep,
    normals: &[DVector<f64>],
    eps_zero: f64,
) -> Result<SlackMatrix> {
    let d = v.dim();
    if let Some((j, h)) = normals.iter().enumerate().find(|(_, h)| h.len() != d) {
        return Err(Error::DimensionMismatch(format!(
            "facet normal {j} has length {}, expected {d}",
            h.len()
        )));
    }
    let n = v.len();
    let m = normals.len();
    let mut s = DMatrix::from_element(n, m, 1.0);
    for (j, h) in normals.iter().enumerate() {
        for i in 0..n {
            s[(i, j)] -= v.matrix().column(i).dot(h);
        }
    }
    let threshold = eps_zero * (1.0 + s.amax());
    for j in 0..m {
        for i in 0..n {
            if s[(i, j)] < -threshold {
                return Err(Error::NegativeSlack {
                    vertex: i,
                    facet: j,
                    value: s[(i, j)],
                });
            }
        }
    }
    let zero_set = zero_pattern(&s, eps_zero, d)?;
    for j in 0..m {
        for i in 0..n {
            if zero_set.is_on(i, j) {
                s[(i, j)] = 0.0;
            }
        }
    }
    Ok(SlackMatrix { entries: s, zero_set })
}

/// Thresholds a matrix into an incidence: `(i, j)` is a zero iff
/// `|S_ij| ≤ eps_zero · (1 + max|S|)`.
pub fn zero_pattern(s: &DMatrix<f64>, eps_zero: f64, d: usize) -> Result<FacetIncidence> {
    if eps_zero <= 0.0 {
        return Err(Error::InvalidParam(format!("eps_zero {eps_zero} must be > 0")));
    }
    numerics::check_finite(s)?;
    let (n, m) = s.shape();
    let threshold = eps_zero * (1.0 + s.amax());
    let mut on_facet = vec![false; n * m];
    for i in 0..n {
        for j in 0..m {
            on_facet[i * m + j] = s[(i, j)].abs() <= threshold;
        }
    }
    FacetIncidence::new(n, m, on_facet, d)
}

/// Unit normal `a` and offset `b` of the hyperplane `aᵀx = b` through `d`
/// points, or `None` if they are affinely dependent.
fn hyperplane_through(points: &[DVector<f64>]) -> Option<(DVector<f64>, f64)> {
    let d = points[0].len();
    let diffs = DMatrix::from_fn(d - 1, d, |r, c| points[r + 1][c] - points[0][c]);
    let scale = diffs.amax().max(1.0);
    // Generalized cross product: cofactors along a virtual first row.
    let mut normal = DVector::zeros(d);
    for k in 0..d {
        let minor = diffs.clone().remove_column(k);
        let det = if d == 1 { 1.0 } else { minor.determinant() };
        normal[k] = if k % 2 == 0 { det } else { -det };
    }
    let norm = normal.norm();
    if norm <= 1e-12 * scale.powi(d as i32 - 1) {
        return None;
    }
    normal /= norm;
    let offset = normal.dot(&points[0]);
    Some((normal, offset))
}

/// Iterates over all `k`-subsets of `0..n` in lexicographic order.
fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(&[usize]) -> Result<()>) -> Result<()> {
    if k > n {
        return Ok(());
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx)?;
        let mut pos = k;
        while pos > 0 && idx[pos - 1] == n - k + pos - 1 {
            pos -= 1;
        }
        if pos == 0 {
            return Ok(());
        }
        idx[pos - 1] += 1;
        for p in pos..k {
            idx[p] = idx[p - 1] + 1;
        }
    }
}

/// Brute-force facet enumeration for points in simplicial position.
///
/// Every `d`-subset spans a hyperplane; it is a facet iff all remaining
/// points lie strictly on one side (by more than [`EPS_SIDE`]). A supporting
/// hyperplane that touches an extra point is reported as
/// [`Error::NotSimplicial`]. Works whether or not the origin is interior.
pub fn facet_enumeration(v: &PolytopeVRep) -> Result<FacetIncidence> {
    let d = v.dim();
    let n = v.len();
    let points: Vec<DVector<f64>> = (0..n).map(|i| v.vertex(i)).collect();
    let mut facets: Vec<Vec<usize>> = Vec::new();
    for_each_subset(n, d, |subset| {
        let chosen: Vec<DVector<f64>> = subset.iter().map(|&i| points[i].clone()).collect();
        let Some((normal, offset)) = hyperplane_through(&chosen) else {
            return Ok(());
        };
        let (mut above, mut below, mut touching) = (false, false, None);
        for (k, p) in points.iter().enumerate() {
            if subset.contains(&k) {
                continue;
            }
            let side = normal.dot(p) - offset;
            if side > EPS_SIDE {
                above = true;
            } else if side < -EPS_SIDE {
                below = true;
            } else {
                touching = Some(k);
            }
            if above && below {
                return Ok(());
            }
        }
        if let Some(k) = touching {
            return Err(Error::NotSimplicial(format!(
                "supporting hyperplane of {subset:?} also contains vertex {k}"
            )));
        }
        facets.push(subset.to_vec());
        Ok(())
    })?;
    for k in 0..n {
        if !facets.iter().any(|f| f.contains(&k)) {
            return Err(Error::InteriorPoint(k));
        }
    }
    FacetIncidence::from_facets(n, &facets, d)
}

/// `n` i.i.d. uniform points on the unit `(d-1)`-sphere, resampled until
/// they form a simplicial polytope with every point a vertex and the origin
/// strictly inside, so that every facet has the form `hᵀx = 1`.
pub fn random_inscribed(n: usize, d: usize, seed: u64) -> Result<(PolytopeVRep, FacetIncidence)> {
    if d < 2 || n < d + 1 {
        return Err(Error::Precondition(format!(
            "need d >= 2 and n >= d + 1, got n={n}, d={d}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_RESAMPLES {
        let mut mat = DMatrix::<f64>::zeros(d, n);
        for mut col in mat.column_iter_mut() {
            loop {
                for x in col.iter_mut() {
                    *x = StandardNormal.sample(&mut rng);
                }
                let norm = col.norm();
                if norm > 1e-12 {
                    col /= norm;
                    break;
                }
            }
        }
        let poly = match PolytopeVRep::from_matrix(mat) {
            Ok(p) => p,
            Err(Error::NotFullDimensional) => continue,
            Err(e) => return Err(e),
        };
        match facet_enumeration(&poly) {
            Ok(inc) if verify_inscription(&poly, &inc, TOL_FIT, TOL_SIDE).ok => return Ok((poly, inc)),
            Ok(_) => continue,
            Err(Error::NotSimplicial(_) | Error::InteriorPoint(_) | Error::NotFullDimensional) => {
                continue
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::RetryLimit(MAX_RESAMPLES))
}

/// Householder reflection `Q` with `Q x = ‖x‖ e₁`.
pub(crate) fn householder_to_e1(x: &DVector<f64>) -> DMatrix<f64> {
    let k = x.len();
    let mut u = x.clone();
    u[0] -= x.norm();
    let un = u.norm_squared();
    if un <= 1e-30 * (1.0 + x.norm_squared()) {
        return DMatrix::identity(k, k);
    }
    DMatrix::identity(k, k) - (&u * u.transpose()) * (2.0 / un)
}

/// Moves the vertex centroid of an inscribed polytope to the origin by a
/// projective map that preserves the unit sphere and the combinatorial type.
pub fn normalize_inscription(v: &PolytopeVRep) -> Result<PolytopeVRep> {
    let dev = v.sphere_deviation();
    if dev > UNIT_NORM_TOL {
        return Err(Error::Precondition(format!(
            "vertices are not on the unit sphere (deviation {dev:e})"
        )));
    }
    let n = v.len();
    let centroid: DVector<f64> = v.matrix().column_sum() / n as f64;
    let alpha = centroid.norm();
    if alpha >= 1.0 - 1e-9 {
        return Err(Error::CentroidOnSphere(alpha));
    }
    let rotated = householder_to_e1(&centroid) * v.matrix();
    let shrink = (1.0 - alpha * alpha).sqrt();
    let mut out = rotated.clone();
    for (mut col, src) in out.column_iter_mut().zip(rotated.column_iter()) {
        let denom = 1.0 - alpha * src[0];
        col[0] = (src[0] - alpha) / denom;
        for r in 1..col.len() {
            col[r] = shrink * src[r] / denom;
        }
    }
    PolytopeVRep::from_matrix(out)
}

/// The symmetric `(1+n+m)²` matrix `[[1, 1ᵀ, 1ᵀ], [1, A, S], [1, Sᵀ, B]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramBorderMatrix {
    n: usize,
    m: usize,
    data: DMatrix<f64>,
}

impl GramBorderMatrix {
    /// Validates shape, symmetry and the all-ones border (to 1e-12); the
    /// stored matrix is the exact symmetrization.
    pub fn new(n: usize, m: usize, data: DMatrix<f64>) -> Result<Self> {
        let size = 1 + n + m;
        if data.shape() != (size, size) {
            return Err(Error::DimensionMismatch(format!(
                "expected {size}x{size}, got {}x{}",
                data.nrows(),
                data.ncols()
            )));
        }
        let mut data = numerics::symmetrize(&data)?;
        let dev = (0..size)
            .map(|k| (data[(0, k)] - 1.0).abs())
            .fold(0.0, f64::max);
        if dev > 1e-12 {
            return Err(Error::BorderViolation(dev));
        }
        for k in 0..size {
            data[(0, k)] = 1.0;
            data[(k, 0)] = 1.0;
        }
        Ok(Self { n, m, data })
    }

    /// `WWᵀ` with `W = [[1, 0], [1, Vᵀ], [1, -Hᵀ]]` for an inscription.
    pub fn from_inscription(insc: &Inscription) -> Self {
        let d = insc.polytope.dim();
        let n = insc.polytope.len();
        let m = insc.facet_normals.len();
        let mut w = DMatrix::zeros(1 + n + m, d + 1);
        w[(0, 0)] = 1.0;
        for i in 0..n {
            w[(1 + i, 0)] = 1.0;
            for k in 0..d {
                w[(1 + i, 1 + k)] = insc.polytope.matrix()[(k, i)];
            }
        }
        for (j, h) in insc.facet_normals.iter().enumerate() {
            w[(1 + n + j, 0)] = 1.0;
            for k in 0..d {
                w[(1 + n + j, 1 + k)] = -h[k];
            }
        }
        let data = &w * w.transpose();
        Self::new(n, m, data).expect("WWᵀ has an exact unit border")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn size(&self) -> usize {
        1 + self.n + self.m
    }

    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn into_data(self) -> DMatrix<f64> {
        self.data
    }

    pub fn a_block(&self) -> DMatrix<f64> {
        self.data.view((1, 1), (self.n, self.n)).into_owned()
    }

    pub fn s_block(&self) -> DMatrix<f64> {
        self.data.view((1, 1 + self.n), (self.n, self.m)).into_owned()
    }

    pub fn b_block(&self) -> DMatrix<f64> {
        self.data
            .view((1 + self.n, 1 + self.n), (self.m, self.m))
            .into_owned()
    }
}

/// An inscribed realization: unit-norm vertices plus facet normals with
/// facets `1 - h_jᵀx ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Inscription {
    pub polytope: PolytopeVRep,
    pub facet_normals: Vec<DVector<f64>>,
    pub incidence: FacetIncidence,
}

impl Inscription {
    /// Fits facet normals for `incidence` to unit-norm vertices with the
    /// origin interior; fails if the realization does not match.
    pub fn fit(polytope: PolytopeVRep, incidence: FacetIncidence) -> Result<Self> {
        let dev = polytope.sphere_deviation();
        if dev > UNIT_NORM_TOL {
            return Err(Error::Precondition(format!(
                "vertices are not on the unit sphere (deviation {dev:e})"
            )));
        }
        let report = verify_inscription(&polytope, &incidence, 1e-9, 1e-9);
        if !report.ok {
            return Err(Error::Precondition(format!(
                "vertices do not realize the incidence with the origin interior (bad facets {:?})",
                report.bad_facets
            )));
        }
        let facet_normals = report.normals.into_iter().map(|h| h.expect("ok fit")).collect();
        let insc = Self {
            polytope,
            facet_normals,
            incidence,
        };
        let slack = insc.slack()?;
        if slack.zero_set != insc.incidence {
            return Err(Error::Precondition(
                "slack zero pattern differs from the declared incidence".into(),
            ));
        }
        Ok(insc)
    }

    pub fn slack(&self) -> Result<SlackMatrix> {
        slack_from_reps(&self.polytope, &self.facet_normals, EPS_ZERO)
    }

    /// `Σ_j ‖h_j‖²`.
    pub fn normal_norm_sq_sum(&self) -> f64 {
        self.facet_normals.iter().map(|h| h.norm_squared()).sum()
    }
}

/// Recovers vertices from a (near) rank-`d+1` bordered Gram matrix: factor
/// the top `d+1` eigenpairs, rotate the border row onto `e₁`, read the
/// remaining rows as `[1, v_iᵀ]`, and scale each `v_i` onto the unit sphere.
pub fn extract_vertices(x: &GramBorderMatrix, d: usize, tol: f64) -> Result<PolytopeVRep> {
    let size = x.size();
    let r = d + 1;
    if r > size {
        return Err(Error::Precondition(format!(
            "rank {r} exceeds matrix size {size}"
        )));
    }
    let eig = numerics::eig_of_symmetric(x.data().clone());
    let mut factor = DMatrix::zeros(size, r);
    for k in 0..r {
        let scale = eig.values[k].max(0.0).sqrt();
        factor.set_column(k, &(eig.vectors.column(k) * scale));
    }
    let first: DVector<f64> = factor.row(0).transpose();
    let reflect = householder_to_e1(&first);
    let rotated = factor * reflect;
    let dev = (rotated[(0, 0)] - 1.0).abs().max(
        (1..r).map(|k| rotated[(0, k)].abs()).fold(0.0, f64::max),
    );
    if dev > tol {
        return Err(Error::BorderViolation(dev));
    }
    let n = x.n();
    let mut verts = DMatrix::zeros(d, n);
    for i in 0..n {
        let mut v = DVector::from_iterator(d, (0..d).map(|k| rotated[(1 + i, 1 + k)]));
        let norm = v.norm();
        if norm < tol {
            return Err(Error::ZeroVertex(i));
        }
        v /= norm;
        verts.set_column(i, &v);
    }
    PolytopeVRep::from_matrix(verts)
}

/// Result of matching a realization against a target incidence.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub ok: bool,
    /// Facets that failed to match, ascending.
    pub bad_facets: Vec<usize>,
    /// Least-squares normals per facet (`None` where the fit was degenerate).
    pub normals: Vec<Option<DVector<f64>>>,
}

/// For each facet, fits `hᵀv_i = 1` over its vertices by least squares; the
/// facet matches iff every residual is at most `tol_fit` and every other
/// vertex has slack `1 - hᵀv_k ≥ tol_side`.
pub fn verify_inscription(
    v: &PolytopeVRep,
    target: &FacetIncidence,
    tol_fit: f64,
    tol_side: f64,
) -> VerifyReport {
    let m = target.m();
    if v.len() != target.n() {
        return VerifyReport {
            ok: false,
            bad_facets: (0..m).collect(),
            normals: vec![None; m],
        };
    }
    let d = v.dim();
    let mut bad_facets = Vec::new();
    let mut normals = Vec::with_capacity(m);
    for j in 0..m {
        let members = target.facet_vertices(j);
        let fit = fit_facet(v, &members, d);
        let matched = fit.as_ref().is_some_and(|(h, residual)| {
            *residual <= tol_fit
                && (0..v.len())
                    .filter(|i| !target.is_on(*i, j))
                    .all(|k| 1.0 - v.matrix().column(k).dot(h) >= tol_side)
        });
        if !matched {
            bad_facets.push(j);
        }
        normals.push(fit.map(|(h, _)| h));
    }
    VerifyReport {
        ok: bad_facets.is_empty(),
        bad_facets,
        normals,
    }
}

fn fit_facet(v: &PolytopeVRep, members: &[usize], d: usize) -> Option<(DVector<f64>, f64)> {
    if members.len() < d {
        return None;
    }
    let a = DMatrix::from_fn(members.len(), d, |r, c| v.matrix()[(c, members[r])]);
    let ones = DVector::from_element(members.len(), 1.0);
    let sv = numerics::singular_values(&a).ok()?;
    let smax = sv.max();
    let smin = sv.min();
    if smax <= 0.0 || smin <= 1e-10 * smax {
        return None;
    }
    let qr = a.clone().qr();
    let h = qr.r().solve_upper_triangular(&(qr.q().transpose() * &ones))?;
    let residual = (&a * &h - ones).amax();
    Some((h, residual))
}

fn euler_phi(mut k: u64) -> u64 {
    let mut result = k;
    let mut p = 2;
    while p * p <= k {
        if k.is_multiple_of(p) {
            while k.is_multiple_of(p) {
                k /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if k > 1 {
        result -= result / k;
    }
    result
}

/// Number of combinatorial types of simplicial `d`-polytopes with `d+2` or
/// `d+3` vertices.
pub fn count_types(n: usize, d: usize) -> Result<u64> {
    if n == d + 2 {
        return Ok((d / 2) as u64);
    }
    if n != d + 3 || d >= 60 {
        return Err(Error::Unsupported { n, d });
    }
    let q = (d + 3) as u64;
    let necklace_sum: u64 = (1..=q)
        .filter(|h| h % 2 == 1 && q.is_multiple_of(*h))
        .map(|h| euler_phi(h) << (q / h))
        .sum();
    if !necklace_sum.is_multiple_of(4 * q) {
        return Err(Error::Unsupported { n, d });
    }
    let total = (1i128 << (d / 2)) - ((d + 4) / 2) as i128 + (necklace_sum / (4 * q)) as i128;
    u64::try_from(total).map_err(|_| Error::Unsupported { n, d })
}
