//! Fusion method selector for configs and the CLI.

use std::fmt;
use std::str::FromStr;

use sl_core::{Real, SubjectiveOpinion};

use crate::error::FusionError;
use crate::fuse::{fuse_baf_sequential, fuse_bcf, fuse_cbf, fuse_dbf, fuse_gbaf};

/// Which operator combines the per-view opinions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FusionMethod {
    Bcf,
    Cbf,
    Baf,
    Gbaf,
    Dbf,
}

impl FusionMethod {
    pub const ALL: [FusionMethod; 5] = [
        FusionMethod::Bcf,
        FusionMethod::Cbf,
        FusionMethod::Baf,
        FusionMethod::Gbaf,
        FusionMethod::Dbf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FusionMethod::Bcf => "bcf",
            FusionMethod::Cbf => "cbf",
            FusionMethod::Baf => "baf",
            FusionMethod::Gbaf => "gbaf",
            FusionMethod::Dbf => "dbf",
        }
    }

    /// Runs the operator. `lambda` is only consulted by DBF.
    pub fn fuse<T: Real>(
        self,
        opinions: &[SubjectiveOpinion<T>],
        lambda: T,
    ) -> Result<SubjectiveOpinion<T>, FusionError> {
        match self {
            FusionMethod::Bcf => fuse_bcf(opinions),
            FusionMethod::Cbf => fuse_cbf(opinions),
            FusionMethod::Baf => fuse_baf_sequential(opinions),
            FusionMethod::Gbaf => fuse_gbaf(opinions),
            FusionMethod::Dbf => fuse_dbf(opinions, lambda).map(|(fused, _)| fused),
        }
    }
}

impl fmt::Display for FusionMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FusionMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "bcf" => Ok(FusionMethod::Bcf),
            "cbf" => Ok(FusionMethod::Cbf),
            "baf" => Ok(FusionMethod::Baf),
            "gbaf" => Ok(FusionMethod::Gbaf),
            "dbf" => Ok(FusionMethod::Dbf),
            other => Err(format!(
                "unknown fusion method {other:?}; expected one of bcf, cbf, baf, gbaf, dbf"
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_names() {
        for method in FusionMethod::ALL {
            assert_eq!(method.name().parse::<FusionMethod>().unwrap(), method);
        }
        assert!("dst".parse::<FusionMethod>().is_err());
    }
}
