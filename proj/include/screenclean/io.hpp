#pragma once

#include "screenclean/core.hpp"
#include "screenclean/persistence.hpp"
#include "screenclean/pipeline.hpp"
#include "screenclean/simulation.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace screenclean {

inline constexpr const char* kVersion = "0.1.0";

/// Header row required; column `y` is the response and the remaining columns,
/// in file order, are covariates. Blank lines are skipped.
Dataset read_dataset_csv(const std::filesystem::path& path);
Dataset parse_dataset_csv(const std::string& text);

/// Subtracts the sample mean of y.
Dataset center_response(const Dataset& data);

/// FNV-1a of a canonical config string, as 16 hex digits.
std::string config_hash(const std::string& canonical);

/// "# screenclean <version> seed=<seed> config=<hash>"
std::string provenance_line(std::uint64_t seed, const std::string& canonical_config);

std::string clean_table_csv(const PipelineResult& result, const Dataset& data, const std::string& provenance);
std::string screen_path_csv(const PipelineResult& result, const std::string& provenance);
std::string cv_curve_csv(const PipelineResult& result, const std::string& provenance);
/// JSON summary of a run; variable indices are 1-based, matching the CSVs.
std::string summary_json(const PipelineResult& result, const Dataset& data, const PipelineConfig& cfg);

std::string table1_csv(const std::vector<Table1Row>& rows, const std::string& provenance);
std::string table2_csv(const std::vector<Table2Row>& rows, const std::string& provenance);
std::string cells_csv(const std::vector<CellResult>& cells, const std::string& provenance);

std::string persistence_curve_csv(const PersistenceReport& report, const std::string& provenance);
std::string persistence_summary_csv(const PersistenceReport& report, const std::string& provenance);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace screenclean
