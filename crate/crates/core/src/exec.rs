//! Data-parallel helpers. With the `parallel` feature the maps run on rayon;
//! without it they run sequentially. Results are always returned in index
//! order, so reductions over them are independent of the worker count.

/// Worker-count setting. `None` uses the ambient rayon pool.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Workers(pub Option<usize>);

impl Workers {
    pub const SERIAL: Workers = Workers(Some(1));

    pub fn new(count: Option<usize>) -> Self {
        Workers(count.filter(|&c| c > 0))
    }
}

/// Run `f` with the requested number of workers.
#[cfg(feature = "parallel")]
pub fn run_with<R: Send>(workers: Workers, f: impl FnOnce() -> R + Send) -> R {
    match workers.0 {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        None => f(),
    }
}

#[cfg(not(feature = "parallel"))]
pub fn run_with<R: Send>(_workers: Workers, f: impl FnOnce() -> R + Send) -> R {
    f()
}

#[cfg(feature = "parallel")]
pub fn par_map_range<R: Send>(n: usize, f: impl Fn(usize) -> R + Sync + Send) -> Vec<R> {
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn par_map_range<R: Send>(n: usize, f: impl Fn(usize) -> R + Sync + Send) -> Vec<R> {
    (0..n).map(f).collect()
}

#[cfg(feature = "parallel")]
pub fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    items.iter().map(f).collect()
}

/// Split `0..n` into contiguous chunks of at most `chunk` indices.
pub fn chunks(n: usize, chunk: usize) -> Vec<std::ops::Range<usize>> {
    let chunk = chunk.max(1);
    (0..n.div_ceil(chunk))
        .map(|i| i * chunk..((i + 1) * chunk).min(n))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_preserves_order_for_any_worker_count() {
        let serial = run_with(Workers::SERIAL, || par_map_range(1000, |i| i * i));
        let many = run_with(Workers(Some(4)), || par_map_range(1000, |i| i * i));
        assert_eq!(serial, many);
        assert_eq!(serial[999], 999 * 999);
    }

    #[test]
    fn chunks_cover_range() {
        let c = chunks(10, 4);
        assert_eq!(c, vec![0..4, 4..8, 8..10]);
        assert!(chunks(0, 4).is_empty());
    }
}
