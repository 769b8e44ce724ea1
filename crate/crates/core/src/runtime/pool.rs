use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Order-preserving pool for pure evaluation tasks.
///
/// Results always come back in submission order, so any reduction over them
/// is bit-identical whatever the worker count. A failing or panicking task
/// aborts the whole batch; the lowest failing index is reported.
#[derive(Clone)]
pub struct WorkerPool {
    workers: usize,
    pool: Option<Arc<rayon::ThreadPool>>,
}

impl std::fmt::Debug for WorkerPool {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WorkerPool").field("workers", &self.workers).finish()
    }
}

impl WorkerPool {
    pub fn new(workers: usize) -> Result<Self> {
        if workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        let pool = if workers == 1 {
            None
        } else {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .thread_name(|i| format!("coevo-worker-{i}"))
                .build()
                .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
            Some(Arc::new(pool))
        };
        Ok(WorkerPool { workers, pool })
    }

    pub fn serial() -> Self {
        WorkerPool {
            workers: 1,
            pool: None,
        }
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    /// Applies `task` to every item and collects results in item order.
    pub fn map<T, R, F>(&self, items: &[T], task: F) -> Result<Vec<R>>
    where
        T: Sync,
        R: Send,
        F: Fn(usize, &T) -> Result<R> + Sync,
    {
        let run = |(i, item): (usize, &T)| -> Result<R> {
            match catch_unwind(AssertUnwindSafe(|| task(i, item))) {
                Ok(Ok(r)) => Ok(r),
                Ok(Err(e)) => Err(Error::Task {
                    index: i,
                    source: Box::new(e),
                }),
                Err(payload) => Err(Error::Panic {
                    index: i,
                    message: panic_message(payload.as_ref()),
                }),
            }
        };
        let results: Vec<Result<R>> = match &self.pool {
            None => items.iter().enumerate().map(run).collect(),
            Some(pool) => pool.install(|| items.par_iter().enumerate().map(run).collect()),
        };
        results.into_iter().collect()
    }

    /// [`WorkerPool::map`] over the indices `0..n`.
    pub fn map_range<R, F>(&self, n: usize, task: F) -> Result<Vec<R>>
    where
        R: Send,
        F: Fn(usize) -> Result<R> + Sync,
    {
        let idx: Vec<usize> = (0..n).collect();
        self.map(&idx, |_, &i| task(i))
    }
}

fn panic_message(payload: &(dyn std::any::Any + Send)) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        (*s).to_string()
    } else if let Some(s) = payload.downcast_ref::<String>() {
        s.clone()
    } else {
        "non-string panic payload".to_string()
    }
}

/// Free-function form of [`WorkerPool::map`].
pub fn parallel_map<T, R, F>(tasks: &[T], workers: usize, task: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(usize, &T) -> Result<R> + Sync,
{
    WorkerPool::new(workers)?.map(tasks, task)
}
