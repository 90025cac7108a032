#pragma once

// Text file formats. Numeric files are whitespace separated; tabular files
// are tab separated with a leading "# ..." header line. Blank lines and
// lines starting with '#' are ignored when reading.

#include "smsloc/core.hpp"
#include "smsloc/eval.hpp"
#include "smsloc/model.hpp"
#include "smsloc/postprocess.hpp"
#include "smsloc/train.hpp"

#include <filesystem>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace smsloc {

/// Malformed or unreadable input. Messages carry the file path and, where
/// relevant, the 1-based line number.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);
/// Fixed notation with `decimals` digits after the point.
std::string format_fixed(double v, int decimals);

// Features: "n d" header, then n rows of d values.
FeatureMatrix read_features(const std::filesystem::path& path);
void write_features(const std::filesystem::path& path, const FeatureMatrix& features);

// Part scores: "n C name_1 ... name_C" header, then for each class three
// rows of n values (start, middle, end).
struct ScoreFile {
  std::vector<std::string> class_names;
  std::vector<PartScores> scores;
};
ScoreFile read_scores(const std::filesystem::path& path);
void write_scores(const std::filesystem::path& path, const ScoreFile& file);

// Manifest rows: id, path[, start, end, class]. Relative paths are resolved
// against the manifest's directory on read and written verbatim.
struct ManifestEntry {
  std::string id;
  std::filesystem::path path;
  std::optional<Window> gt;
  std::string class_name;
};
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries);

// Annotations: video_id, class, start, end.
struct Annotation {
  std::string video_id;
  std::string class_name;
  Window window;
};
std::vector<Annotation> read_annotations(const std::filesystem::path& path);
void write_annotations(const std::filesystem::path& path, const std::vector<Annotation>& rows);

// Detections: video_id, class, start_frame, end_frame, start_sec, end_sec,
// score; times and scores with 6 decimals.
struct DetectionRecord {
  std::string video_id;
  std::string class_name;
  Window window;
  double score = 0.0;
};
void write_detections(std::ostream& out, const std::vector<DetectionRecord>& rows, double fps);
std::vector<DetectionRecord> read_detections(const std::filesystem::path& path);

/// Per-class AP rows followed by a "mAP" row, one column per sigma.
void write_ap_table(std::ostream& out, const EvalResult& result, const std::vector<std::string>& class_names);

void write_history(std::ostream& out, const std::vector<EpochStats>& history);

// Duration priors: JSON document keyed by class name.
std::string priors_to_string(const std::vector<DurationPrior>& priors, const std::vector<std::string>& class_names);
std::vector<std::optional<DurationPrior>> priors_from_string(const std::string& text,
                                                             const std::vector<std::string>& class_names);

}  // namespace smsloc
