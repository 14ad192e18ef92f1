use std::time::Instant;

use symseek_core::algsolve::Clock;

/// Milliseconds since construction.
pub struct WallClock(Instant);

impl WallClock {
    pub fn new() -> WallClock {
        WallClock(Instant::now())
    }
}

impl Default for WallClock {
    fn default() -> Self {
        WallClock::new()
    }
}

impl Clock for WallClock {
    fn now_ms(&self) -> u64 {
        self.0.elapsed().as_millis() as u64
    }
}

/// Stack size for search threads; the solver recurses once per case split.
pub const SEARCH_STACK: usize = 512 << 20;

/// Runs `f` on a thread with a search-sized stack.
pub fn with_search_stack<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> T {
    std::thread::Builder::new()
        .stack_size(SEARCH_STACK)
        .spawn(f)
        .expect("spawn search thread")
        .join()
        .unwrap_or_else(|e| std::panic::resume_unwind(e))
}
