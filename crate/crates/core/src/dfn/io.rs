use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DfnError, FractureNetwork};

pub const NETWORK_FORMAT_VERSION: u32 = 1;

#[derive(Serialize)]
struct Envelope<'a> {
    format_version: u32,
    #[serde(flatten)]
    network: &'a FractureNetwork,
}

#[derive(Deserialize)]
struct OwnedEnvelope {
    format_version: u32,
    #[serde(flatten)]
    network: FractureNetwork,
}

impl FractureNetwork {
    pub fn to_json(&self) -> Result<String, DfnError> {
        Ok(serde_json::to_string_pretty(&Envelope {
            format_version: NETWORK_FORMAT_VERSION,
            network: self,
        })?)
    }

    pub fn from_json(text: &str) -> Result<FractureNetwork, DfnError> {
        let env: OwnedEnvelope = serde_json::from_str(text)?;
        if env.format_version != NETWORK_FORMAT_VERSION {
            return Err(DfnError::Version(env.format_version));
        }
        Ok(env.network)
    }
}

pub fn write_network(network: &FractureNetwork, path: &Path) -> Result<(), DfnError> {
    fs::write(path, network.to_json()?)?;
    Ok(())
}

pub fn read_network(path: &Path) -> Result<FractureNetwork, DfnError> {
    FractureNetwork::from_json(&fs::read_to_string(path)?)
}
