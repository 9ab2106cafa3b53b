//! Thin switch between rayon and sequential iteration. Results are always
//! collected in index order so callers can reduce deterministically.

#[cfg(feature = "parallel")]
pub fn map_range<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_range<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

#[cfg(feature = "parallel")]
pub fn sort_f64(xs: &mut [f64]) {
    use rayon::prelude::*;
    xs.par_sort_unstable_by(f64::total_cmp);
}

#[cfg(not(feature = "parallel"))]
pub fn sort_f64(xs: &mut [f64]) {
    xs.sort_unstable_by(f64::total_cmp);
}
