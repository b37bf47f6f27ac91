//! Data-parallel helpers. With the `parallel` feature (default) grid
//! evaluations fan out over rayon; without it everything runs on the
//! calling thread. Output order always follows input order.

/// How a grid evaluation is scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Falls back to sequential when built without the `parallel` feature.
    #[default]
    Parallel,
}

impl Execution {
    pub fn map<T, U, F>(self, items: &[T], f: F) -> Vec<U>
    where
        T: Sync,
        U: Send,
        F: Fn(&T) -> U + Sync + Send,
    {
        match self {
            Execution::Sequential => items.iter().map(f).collect(),
            Execution::Parallel => par_map(items, f),
        }
    }
}

#[cfg(feature = "parallel")]
fn par_map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn par_map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    items.iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_modes_preserve_order() {
        let xs: Vec<u32> = (0..1000).collect();
        let seq = Execution::Sequential.map(&xs, |x| x * 3);
        let par = Execution::Parallel.map(&xs, |x| x * 3);
        assert_eq!(seq, par);
        assert_eq!(seq[999], 2997);
    }
}
