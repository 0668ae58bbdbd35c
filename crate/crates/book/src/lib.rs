//! The chapters of the guide in `book/src`, compiled as doc-tests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/couplings.md")]
pub mod couplings {}
#[doc = include_str!("../../../book/src/fields.md")]
pub mod fields {}
#[doc = include_str!("../../../book/src/tilings.md")]
pub mod tilings {}
#[doc = include_str!("../../../book/src/graphs.md")]
pub mod graphs {}
#[doc = include_str!("../../../book/src/kpz.md")]
pub mod kpz {}
#[doc = include_str!("../../../book/src/campaigns.md")]
pub mod campaigns {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
