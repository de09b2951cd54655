//! Index-ordered batch maps. With the `parallel` feature the default entry
//! points fan out over rayon; output order always follows the input index.

pub mod sequential {
    pub fn map_range<T, F>(count: u64, f: F) -> Vec<T>
    where
        F: Fn(u64) -> T,
    {
        (0..count).map(f).collect()
    }

    pub fn map_slice<I, T, F>(items: &[I], f: F) -> Vec<T>
    where
        F: Fn(&I) -> T,
    {
        items.iter().map(f).collect()
    }
}

#[cfg(feature = "parallel")]
pub mod parallel {
    use rayon::prelude::*;

    pub fn map_range<T, F>(count: u64, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send,
    {
        (0..count).into_par_iter().map(f).collect()
    }

    pub fn map_slice<I, T, F>(items: &[I], f: F) -> Vec<T>
    where
        I: Sync,
        T: Send,
        F: Fn(&I) -> T + Sync + Send,
    {
        items.par_iter().map(f).collect()
    }
}

#[cfg(feature = "parallel")]
pub use parallel::{map_range, map_slice};

#[cfg(not(feature = "parallel"))]
pub fn map_range<T, F>(count: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    sequential::map_range(count, f)
}

#[cfg(not(feature = "parallel"))]
pub fn map_slice<I, T, F>(items: &[I], f: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync + Send,
{
    sequential::map_slice(items, f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_matches_sequential_order() {
        let a = map_range(1000, |i| i * i);
        let b = sequential::map_range(1000, |i| i * i);
        assert_eq!(a, b);
        let items: Vec<u32> = (0..500).collect();
        assert_eq!(map_slice(&items, |x| x + 1), sequential::map_slice(&items, |x| x + 1));
    }
}
