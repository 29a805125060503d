//! Evaluation strategy for independent work items (twists, scan rows).
//!
//! Results always come back in input order, so reports do not depend on the
//! strategy. Without the `parallel` feature both strategies run sequentially.

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    pub fn map_collect<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            Execution::Sequential => items.iter().map(f).collect(),
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                items.par_iter().map(f).collect()
            }
            #[cfg(not(feature = "parallel"))]
            Execution::Parallel => items.iter().map(f).collect(),
        }
    }

    /// As [`Execution::map_collect`], failing with the first error in input
    /// order.
    pub fn try_map_collect<T, R, F>(self, items: &[T], f: F) -> Result<Vec<R>>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> Result<R> + Sync + Send,
    {
        self.map_collect(items, f).into_iter().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let items: Vec<u64> = (0..200).collect();
        let seq = Execution::Sequential.map_collect(&items, |x| x * x);
        let par = Execution::Parallel.map_collect(&items, |x| x * x);
        assert_eq!(seq, par);
        assert_eq!(seq[13], 169);
    }

    #[test]
    fn first_error_wins() {
        let items: Vec<i64> = (0..50).collect();
        let r = Execution::Parallel.try_map_collect(&items, |&x| {
            if x % 7 == 6 {
                Err(crate::Error::Input(format!("bad {x}")))
            } else {
                Ok(x)
            }
        });
        assert_eq!(r.unwrap_err().to_string(), "bad 6");
    }
}
