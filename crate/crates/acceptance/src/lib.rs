//! Placeholder library; the acceptance criteria live in the `acceptance` test target.
