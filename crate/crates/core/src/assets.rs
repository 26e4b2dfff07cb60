//! Models shipped with the toolchain.

/// Medtronic MiniMed 530G data entry.
pub const MINIMED: &str = include_str!("../models/minimed.emuc");

/// Alaris GP infusion pump data entry with single and double chevrons.
pub const ALARIS: &str = include_str!("../models/alaris.emuc");

/// `(file name, source)` of every shipped model.
pub const ALL: &[(&str, &str)] = &[("minimed.emuc", MINIMED), ("alaris.emuc", ALARIS)];
