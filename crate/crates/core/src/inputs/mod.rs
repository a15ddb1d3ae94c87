//! Input tuples, literal parsing, mutation and corpus expansion.

mod expand;
mod literal;
mod mutate;

pub use expand::{
    expand, validate, ExpandError, Goal, InputCorpus, Member, MemberSource, Shortfall, SuggestRequest, SuggesterClient,
    Validation,
};
pub use literal::{canonical_text, literal_value, parse_input_literal, parse_value_literal, InputTuple, LiteralParseError};
pub use mutate::{mutate, stream, MutationPolicy};
