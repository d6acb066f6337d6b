//! Deliberate single-point faults used to show that the acceptance checks can fail.

use std::cell::Cell;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Mutation {
    /// `i + j < 2n` becomes `i + j <= 2n` in the `s_even` index set.
    SEvenBound,
    /// The coefficient `2` of `2 q d/dq D^2` in the third Painlevé operator becomes `1`.
    HirotaCoefficient,
}

thread_local! {
    static ACTIVE: Cell<Option<Mutation>> = const { Cell::new(None) };
}

pub fn is_active(m: Mutation) -> bool {
    ACTIVE.with(|a| a.get() == Some(m))
}

/// Runs `f` with `m` switched on for the current thread.
pub fn with_mutation<T>(m: Mutation, f: impl FnOnce() -> T) -> T {
    struct Reset(Option<Mutation>);
    impl Drop for Reset {
        fn drop(&mut self) {
            ACTIVE.with(|a| a.set(self.0));
        }
    }
    let _reset = Reset(ACTIVE.with(|a| a.replace(Some(m))));
    f()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scoped() {
        assert!(!is_active(Mutation::SEvenBound));
        with_mutation(Mutation::SEvenBound, || assert!(is_active(Mutation::SEvenBound)));
        assert!(!is_active(Mutation::SEvenBound));
    }
}
