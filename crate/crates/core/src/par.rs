//! Data-parallel helpers with a sequential fallback.
//!
//! Every helper takes an [`ExecMode`]. `Parallel` dispatches to rayon when the
//! `parallel` feature is compiled in and silently degrades to `Sequential`
//! otherwise, so results never depend on the mode.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ExecMode {
    Sequential,
    #[default]
    Parallel,
}

impl ExecMode {
    /// True when work will actually fan out across threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == ExecMode::Parallel
    }
}

/// Order-preserving map.
pub fn map<T, R, F>(mode: ExecMode, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        return items.par_iter().map(f).collect();
    }
    let _ = mode;
    items.iter().map(f).collect()
}

/// Order-preserving map over `0..n`.
pub fn map_range<R, F>(mode: ExecMode, n: u64, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(u64) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = mode;
    (0..n).map(f).collect()
}

/// Smallest `i` in `start..end` satisfying `pred`.
pub fn find_first_in<F>(mode: ExecMode, start: u64, end: u64, pred: F) -> Option<u64>
where
    F: Fn(u64) -> bool + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        return (start..end).into_par_iter().find_first(|&i| pred(i));
    }
    let _ = mode;
    (start..end).find(|&i| pred(i))
}

pub fn sum_u64<T, F>(mode: ExecMode, items: &[T], f: F) -> u64
where
    T: Sync,
    F: Fn(&T) -> u64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        return items.par_iter().map(f).sum();
    }
    let _ = mode;
    items.iter().map(f).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        let xs: Vec<u64> = (0..1000).collect();
        for mode in [ExecMode::Sequential, ExecMode::Parallel] {
            assert_eq!(map(mode, &xs, |x| x * 2)[999], 1998);
            assert_eq!(sum_u64(mode, &xs, |x| *x), 499_500);
            assert_eq!(find_first_in(mode, 0, 10_000, |i| i > 10 && i % 97 == 0), Some(97));
            assert_eq!(map_range(mode, 5, |i| i + 1), vec![1, 2, 3, 4, 5]);
        }
    }
}
