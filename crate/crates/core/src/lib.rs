pub mod continuation;
pub mod hybrid;
pub mod models;
pub mod numerics;
pub mod presets;
pub mod rootsearch;
pub mod simulate;
pub mod transcription;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/models.md")]
    mod models {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/collocation.md")]
    mod collocation {}
    #[doc = include_str!("../../../book/src/gait-search.md")]
    mod gait_search {}
    #[doc = include_str!("../../../book/src/continuation.md")]
    mod continuation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
