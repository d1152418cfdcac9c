//! Runs the code blocks of the guide as doctests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub struct Introduction;

#[doc = include_str!("../../../book/src/digit-systems.md")]
pub struct DigitSystems;

#[doc = include_str!("../../../book/src/spin-substitutions.md")]
pub struct SpinSubstitutions;

#[doc = include_str!("../../../book/src/odometer.md")]
pub struct Odometer;

#[doc = include_str!("../../../book/src/fourier.md")]
pub struct Fourier;

#[doc = include_str!("../../../book/src/classification.md")]
pub struct Classification;

#[doc = include_str!("../../../book/src/diffraction.md")]
pub struct Diffraction;

#[doc = include_str!("../../../book/src/rendering.md")]
pub struct Rendering;

#[doc = include_str!("../../../book/src/cli.md")]
pub struct Cli;
