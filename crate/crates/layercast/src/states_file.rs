//! Discrete fading states as CSV with the header `gamma,probability`.

use std::io::{Read, Write};
use std::path::Path;

use layercast_core::DiscreteStates;
use serde::{Deserialize, Serialize};

use crate::error::{invalid_input, CliError};

pub const HEADER: [&str; 2] = ["gamma", "probability"];

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    gamma: f64,
    probability: f64,
}

pub fn read_states<R: Read>(reader: R) -> Result<DiscreteStates, CliError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| CliError::usage(format!("states file: {e}")))?;
    if headers.iter().collect::<Vec<_>>() != HEADER {
        return Err(CliError::usage(format!(
            "states file: header must be `{}`, found `{}`",
            HEADER.join(","),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut gains = Vec::new();
    let mut probs = Vec::new();
    for (line, row) in rdr.deserialize::<Row>().enumerate() {
        let row = row.map_err(|e| CliError::usage(format!("states file row {}: {e}", line + 1)))?;
        gains.push(row.gamma);
        probs.push(row.probability);
    }
    if gains.is_empty() {
        return Err(CliError::usage("states file has no rows"));
    }
    DiscreteStates::new(gains, probs).map_err(invalid_input)
}

pub fn load_states(path: &Path) -> Result<DiscreteStates, CliError> {
    let file = std::fs::File::open(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    read_states(file)
}

pub fn write_states<W: Write>(states: &DiscreteStates, writer: W) -> Result<(), CliError> {
    let mut wtr = csv::Writer::from_writer(writer);
    for (&gamma, &probability) in states.gains().iter().zip(states.probabilities()) {
        wtr.serialize(Row { gamma, probability })
            .map_err(|e| CliError::Output(e.to_string()))?;
    }
    wtr.flush().map_err(|e| CliError::Output(e.to_string()))
}
