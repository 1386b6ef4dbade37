#ifndef SUITFILTER_IO_HPP
#define SUITFILTER_IO_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "suitfilter/correctness.hpp"
#include "suitfilter/harness.hpp"
#include "suitfilter/pipeline.hpp"
#include "suitfilter/types.hpp"

namespace suitfilter {

/// Parsed logit file: validated records plus the inferred class count.
struct LogitTable {
  std::vector<LogitRecord> records;
  std::size_t n_classes = 0;
};

enum class TableFormat { kAuto, kCsv, kJsonl };

/// Shortest decimal string that round-trips to the same double.
std::string format_double(double v);

/// Reads and validates a logit table.  kAuto picks the format from the file
/// extension (.csv / .jsonl, defaulting to CSV).  Ragged rows, non-numeric
/// logits, duplicate ids, inconsistent k, and out-of-range labels raise
/// ParseError with row/column context.
LogitTable read_logit_table(const std::string& path,
                            TableFormat format = TableFormat::kAuto);

/// Parsers on in-memory text, used by read_logit_table and the tests.
LogitTable parse_logit_csv(const std::string& text,
                           const std::string& source_name);
LogitTable parse_logit_jsonl(const std::string& text,
                             const std::string& source_name);

/// Serializers; optional columns (label/prediction/fold) are emitted when
/// any record carries them.  Values survive a round-trip exactly.
std::string logit_table_to_csv(const std::vector<LogitRecord>& records);
std::string logit_table_to_jsonl(const std::vector<LogitRecord>& records);
void write_logit_table(const std::string& path,
                       const std::vector<LogitRecord>& records,
                       TableFormat format = TableFormat::kAuto);

/// CSV of the twelve canonical signals, one row per record (id first).
std::string signals_to_csv(const std::vector<LogitRecord>& records);

/// Estimator persistence (JSON document, see README for the schema).
std::string estimator_to_json_string(const CorrectnessEstimator& estimator);
CorrectnessEstimator estimator_from_json_string(const std::string& text);
void save_estimator(const std::string& path,
                    const CorrectnessEstimator& estimator);
CorrectnessEstimator load_estimator(const std::string& path);

/// Suitability report as a JSON document.  Non-finite t (degenerate Welch
/// limit) is serialized as the strings "inf" / "-inf".
std::string report_to_json_string(const SuitabilityReport& report);

/// Harness exports.
std::string experiments_to_csv(const std::vector<ExperimentRecord>& records);
std::string experiments_to_jsonl(const std::vector<ExperimentRecord>& records);
std::string summary_to_json_string(const GridSummary& summary, double alpha,
                                   std::size_t n_records);
std::string bins_to_csv(const std::vector<SensitivityBin>& bins);

/// Whole-file helpers; failures raise ParseError (read) / ConfigError (write).
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace suitfilter

#endif  // SUITFILTER_IO_HPP
