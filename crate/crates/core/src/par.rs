//! Parallel iteration helpers with a sequential fallback.
//!
//! Every call site must produce bit-identical results with or without the
//! `parallel` feature, so only order-preserving maps are offered here.
//! Reductions stay sequential.

/// Map `$f` over the elements of `$slice`, collecting into a `Vec` in order.
#[macro_export]
macro_rules! par_map {
    ($slice:expr, $f:expr) => {{
        #[cfg(feature = "parallel")]
        {
            use rayon::iter::{IntoParallelRefIterator, ParallelIterator};
            $slice.par_iter().map($f).collect::<Vec<_>>()
        }
        #[cfg(not(feature = "parallel"))]
        {
            $slice.iter().map($f).collect::<Vec<_>>()
        }
    }};
}

/// Map `$f` over an index range, collecting into a `Vec` in order.
#[macro_export]
macro_rules! par_range_map {
    ($range:expr, $f:expr) => {{
        #[cfg(feature = "parallel")]
        {
            use rayon::iter::{IntoParallelIterator, ParallelIterator};
            ($range).into_par_iter().map($f).collect::<Vec<_>>()
        }
        #[cfg(not(feature = "parallel"))]
        {
            ($range).map($f).collect::<Vec<_>>()
        }
    }};
}

/// Fallible map; the first error in index order is not guaranteed, but some
/// error is returned whenever any element fails.
#[macro_export]
macro_rules! par_try_map {
    ($slice:expr, $f:expr) => {{
        #[cfg(feature = "parallel")]
        {
            use rayon::iter::{IntoParallelRefIterator, ParallelIterator};
            $slice
                .par_iter()
                .map($f)
                .collect::<$crate::Result<Vec<_>>>()
        }
        #[cfg(not(feature = "parallel"))]
        {
            $slice.iter().map($f).collect::<$crate::Result<Vec<_>>>()
        }
    }};
}

/// Apply `$f` to each element of `$slice` in place.
#[macro_export]
macro_rules! par_for_each_mut {
    ($slice:expr, $f:expr) => {{
        #[cfg(feature = "parallel")]
        {
            use rayon::iter::{IntoParallelRefMutIterator, ParallelIterator};
            $slice.par_iter_mut().for_each($f);
        }
        #[cfg(not(feature = "parallel"))]
        {
            $slice.iter_mut().for_each($f);
        }
    }};
}

/// True when the crate was built with rayon support.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
