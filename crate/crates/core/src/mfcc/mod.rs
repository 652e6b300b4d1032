//! Two-sided mel-cepstral heartbeat features.

mod bank;
mod dct;
mod features;

pub use bank::{build_mel_bank, filter_response, mel_energies, MelBank, MelBankConfig, MelEnergies};
pub use dct::dct2;
pub use features::{extract_features, fuse, FeatureConfig, FeatureKind, FeatureVector};
