//! Pipeline, file formats and CLI around semtrace-core.

pub mod clients;
pub mod config;
pub mod interchange;
pub mod jsonl;
pub mod pipeline;
pub mod problems;

/// Stack size for threads that run subject programs; deep subject recursion
/// recurses natively in the interpreter.
pub const BIG_STACK: usize = 64 << 20;

/// Runs `f` on a fresh thread with [`BIG_STACK`] bytes of stack.
pub fn with_big_stack<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    std::thread::scope(|s| {
        std::thread::Builder::new()
            .stack_size(BIG_STACK)
            .spawn_scoped(s, f)
            .expect("spawn worker thread")
            .join()
            .unwrap_or_else(|p| std::panic::resume_unwind(p))
    })
}
