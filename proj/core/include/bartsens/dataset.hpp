#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bartsens/matrix.hpp"

namespace bartsens {

/// Covariate matrix with binary treatment and outcome columns. Missing
/// numeric covariate values are imputed to zero only when the schema pairs
/// the column with a missing-indicator column; otherwise ingestion rejects
/// the file.
struct ObservationSet {
  Matrix X;
  std::vector<std::string> covariate_names;
  std::vector<std::int8_t> G;
  std::vector<std::int8_t> B;
  std::vector<std::string> labels;  // empty when no label column configured
  int imputed_count = 0;            // missing cells filled via indicator columns

  int n() const { return X.rows; }
};

struct CsvSchema {
  std::string treatment = "G";
  std::string outcome = "B";
  std::string label;                     // optional row-label column
  std::vector<std::string> covariates;   // empty: every remaining column
  std::string missing_suffix = "_missing";
};

/// Parse a headered CSV into an ObservationSet. Errors name the offending
/// row and column: non-binary treatment/outcome, missing required columns,
/// unparseable numerics, missing values without a paired indicator.
ObservationSet ingest_csv(const std::string& path, const CsvSchema& schema);

/// Deterministic formatting for result CSVs ("%.10g").
std::string format_double(double v);

/// Write rows of already-formatted cells with a header line; creates parent
/// directories as needed.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows,
               const std::vector<std::string>& comment_lines = {});

}  // namespace bartsens
