use std::fmt::Debug;
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point element type for embeddings and index math.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Default + Send + Sync + 'static
{
    /// Tolerance on `| ||v|| - 1 |` accepted for stored unit vectors.
    fn unit_tolerance() -> Self;
}

impl Scalar for f32 {
    fn unit_tolerance() -> Self {
        1e-4
    }
}

impl Scalar for f64 {
    fn unit_tolerance() -> Self {
        1e-4
    }
}

pub(crate) fn cast<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("finite f64 converts to any float")
}

/// Accumulator lanes of the distance kernels. Every kernel sums element `j`
/// into lane `j % LANES` and reduces the lanes in the same fixed tree, so all
/// code paths produce bit-identical distances.
pub const LANES: usize = 16;

#[inline(always)]
fn reduce_lanes<T: Scalar>(acc: &[T; LANES]) -> T {
    let mut width = LANES / 2;
    let mut a = *acc;
    while width > 0 {
        for i in 0..width {
            a[i] = a[i] + a[i + width];
        }
        width /= 2;
    }
    a[0]
}

#[inline(always)]
fn squared_l2_body<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [T::zero(); LANES];
    let chunks_a = a.chunks_exact(LANES);
    let chunks_b = b.chunks_exact(LANES);
    let (rest_a, rest_b) = (chunks_a.remainder(), chunks_b.remainder());
    for (ca, cb) in chunks_a.zip(chunks_b) {
        for i in 0..LANES {
            let d = ca[i] - cb[i];
            acc[i] = acc[i] + d * d;
        }
    }
    for (i, (x, y)) in rest_a.iter().zip(rest_b).enumerate() {
        let d = *x - *y;
        acc[i] = acc[i] + d * d;
    }
    reduce_lanes(&acc)
}

#[inline(always)]
fn dot_body<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [T::zero(); LANES];
    let chunks_a = a.chunks_exact(LANES);
    let chunks_b = b.chunks_exact(LANES);
    let (rest_a, rest_b) = (chunks_a.remainder(), chunks_b.remainder());
    for (ca, cb) in chunks_a.zip(chunks_b) {
        for i in 0..LANES {
            acc[i] = acc[i] + ca[i] * cb[i];
        }
    }
    for (i, (x, y)) in rest_a.iter().zip(rest_b).enumerate() {
        acc[i] = acc[i] + *x * *y;
    }
    reduce_lanes(&acc)
}

/// Query group size of [`dot_group`].
pub const GROUP: usize = 8;

#[inline(always)]
fn dot_group_body<T: Scalar>(q: [&[T]; GROUP], row: &[T]) -> [T; GROUP] {
    let mut acc = [[T::zero(); LANES]; GROUP];
    let full = row.len() / LANES * LANES;
    let mut j = 0;
    while j < full {
        let r = &row[j..j + LANES];
        for (acc_q, qv) in acc.iter_mut().zip(q.iter()) {
            let qc = &qv[j..j + LANES];
            for i in 0..LANES {
                acc_q[i] = acc_q[i] + qc[i] * r[i];
            }
        }
        j += LANES;
    }
    let mut out = [T::zero(); GROUP];
    for ((acc_q, qv), o) in acc.iter_mut().zip(q.iter()).zip(out.iter_mut()) {
        for (i, (x, y)) in qv[full..].iter().zip(&row[full..]).enumerate() {
            acc_q[i] = acc_q[i] + *x * *y;
        }
        *o = reduce_lanes(acc_q);
    }
    out
}

/// Runtime-dispatched kernels. The same generic bodies are compiled for
/// AVX-512, AVX2 and the baseline target; none of them fuses multiply-add,
/// so every path rounds identically.
macro_rules! dispatch {
    ($name:ident, $body:ident, ($($arg:ident: $ty:ty),*) -> $ret:ty) => {
        #[inline]
        pub fn $name<T: Scalar>($($arg: $ty),*) -> $ret {
            #[cfg(target_arch = "x86_64")]
            {
                #[target_feature(enable = "avx512f")]
                unsafe fn wide<T: Scalar>($($arg: $ty),*) -> $ret {
                    $body($($arg),*)
                }
                #[target_feature(enable = "avx2")]
                unsafe fn narrow<T: Scalar>($($arg: $ty),*) -> $ret {
                    $body($($arg),*)
                }
                if std::arch::is_x86_feature_detected!("avx512f") {
                    // SAFETY: the CPU supports AVX-512F.
                    return unsafe { wide($($arg),*) };
                }
                if std::arch::is_x86_feature_detected!("avx2") {
                    // SAFETY: the CPU supports AVX2.
                    return unsafe { narrow($($arg),*) };
                }
            }
            $body($($arg),*)
        }
    };
}

dispatch!(squared_l2, squared_l2_body, (a: &[T], b: &[T]) -> T);
dispatch!(dot, dot_body, (a: &[T], b: &[T]) -> T);
dispatch!(dot_group, dot_group_body, (q: [&[T]; GROUP], row: &[T]) -> [T; GROUP]);

/// Squared L2 distance from a dot product and the two squared norms,
/// clamped at zero.
#[inline]
pub fn l2_from_dot<T: Scalar>(query_sq_norm: T, row_sq_norm: T, dot: T) -> T {
    let d = (query_sq_norm + row_sq_norm) - (dot + dot);
    if d > T::zero() {
        d
    } else {
        T::zero()
    }
}

/// Euclidean norm accumulated in `f64`.
pub fn l2_norm<T: Scalar>(v: &[T]) -> f64 {
    v.iter()
        .map(|x| {
            let x = x.to_f64().unwrap_or(f64::NAN);
            x * x
        })
        .sum::<f64>()
        .sqrt()
}

/// Scales `v` to unit length in place. Returns `false` (leaving `v` untouched)
/// when the norm is zero or not finite.
pub fn l2_normalize<T: Scalar>(v: &mut [T]) -> bool {
    let norm = l2_norm(v);
    if !(norm.is_finite() && norm > 0.0) {
        return false;
    }
    for x in v.iter_mut() {
        *x = cast::<T>(x.to_f64().unwrap_or(0.0) / norm);
    }
    true
}

pub fn is_unit<T: Scalar>(v: &[T]) -> bool {
    let tol = T::unit_tolerance().to_f64().unwrap_or(1e-4);
    let norm = l2_norm(v);
    norm.is_finite() && (norm - 1.0).abs() <= tol
}
