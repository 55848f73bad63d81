pub mod engine;
pub mod envelope;
pub mod error;
pub mod geometry;
pub mod linespace;
pub mod oracle;
pub mod permutations;
pub mod report;
pub mod scenes;
pub mod sphere;

#[cfg(doctest)]
pub mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/scenes.md")]
    pub mod scenes {}
    #[doc = include_str!("../../../book/src/through_line.md")]
    pub mod through_line {}
    #[doc = include_str!("../../../book/src/regions.md")]
    pub mod regions {}
    #[doc = include_str!("../../../book/src/special_cases.md")]
    pub mod special_cases {}
    #[doc = include_str!("../../../book/src/global.md")]
    pub mod global {}
    #[doc = include_str!("../../../book/src/permutations.md")]
    pub mod permutations {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
