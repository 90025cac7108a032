#include "smsloc/io.hpp"

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <sstream>

namespace smsloc {

namespace fs = std::filesystem;

namespace {

struct Line {
  int number;
  std::string text;
};

// Non-blank, non-comment lines with their 1-based numbers.
std::vector<Line> content_lines(const std::string& text) {
  std::vector<Line> out;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    out.push_back({number, std::move(line)});
  }
  return out;
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) out.push_back(std::move(tok));
  return out;
}

std::vector<std::string> split_tabs(const std::string& s) {
  std::vector<std::string> out;
  std::size_t begin = 0;
  while (true) {
    const auto tab = s.find('\t', begin);
    out.push_back(s.substr(begin, tab - begin));
    if (tab == std::string::npos) break;
    begin = tab + 1;
  }
  return out;
}

[[noreturn]] void fail(const fs::path& path, int line, const std::string& what) {
  throw DataError(path.string() + ":" + std::to_string(line) + ": " + what);
}

double parse_double(const std::string& tok, const fs::path& path, int line) {
  double v = 0.0;
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc() || ptr != end) fail(path, line, "expected a number, got '" + tok + "'");
  return v;
}

long long parse_int(const std::string& tok, const fs::path& path, int line) {
  long long v = 0;
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc() || ptr != end) fail(path, line, "expected an integer, got '" + tok + "'");
  return v;
}

Window parse_window(const std::string& s, const std::string& e, const fs::path& path, int line) {
  const Window w{static_cast<int>(parse_int(s, path, line)), static_cast<int>(parse_int(e, path, line))};
  if (!w.valid()) fail(path, line, "invalid window " + to_string(w));
  return w;
}

template <typename Row>
void write_row(std::string& out, const Row& values) {
  for (Eigen::Index j = 0; j < values.size(); ++j) {
    if (j) out += ' ';
    out += format_double(values(j));
  }
  out += '\n';
}

}  // namespace

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path.string() + ": cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(path.string() + ": cannot open for writing");
  out << content;
  if (!out) throw DataError(path.string() + ": write failed");
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string format_fixed(double v, int decimals) {
  char buf[512];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, decimals);
  if (ec != std::errc()) return format_double(v);
  return std::string(buf, ptr);
}

FeatureMatrix read_features(const fs::path& path) {
  const auto lines = content_lines(read_text_file(path));
  if (lines.empty()) throw DataError(path.string() + ": empty feature file");
  const auto header = split_ws(lines[0].text);
  if (header.size() != 2) fail(path, lines[0].number, "header must be 'n d'");
  const auto n = parse_int(header[0], path, lines[0].number);
  const auto d = parse_int(header[1], path, lines[0].number);
  if (n < 1 || d < 1) fail(path, lines[0].number, "n and d must be positive");
  if (static_cast<long long>(lines.size()) - 1 != n)
    throw DataError(path.string() + ": header promises " + std::to_string(n) + " rows, found " +
                    std::to_string(lines.size() - 1));
  FeatureMatrix x(n, d);
  for (long long t = 0; t < n; ++t) {
    const auto& line = lines[t + 1];
    const auto toks = split_ws(line.text);
    if (static_cast<long long>(toks.size()) != d)
      fail(path, line.number, "expected " + std::to_string(d) + " values, got " + std::to_string(toks.size()));
    for (long long j = 0; j < d; ++j) x(t, j) = parse_double(toks[j], path, line.number);
  }
  return x;
}

void write_features(const fs::path& path, const FeatureMatrix& features) {
  std::string out = std::to_string(features.rows()) + " " + std::to_string(features.cols()) + "\n";
  for (Eigen::Index t = 0; t < features.rows(); ++t) write_row(out, features.row(t));
  write_text_file(path, out);
}

ScoreFile read_scores(const fs::path& path) {
  const auto lines = content_lines(read_text_file(path));
  if (lines.empty()) throw DataError(path.string() + ": empty score file");
  const auto header = split_ws(lines[0].text);
  if (header.size() < 2) fail(path, lines[0].number, "header must be 'n C name...'");
  const auto n = parse_int(header[0], path, lines[0].number);
  const auto c = parse_int(header[1], path, lines[0].number);
  if (n < 1 || c < 1) fail(path, lines[0].number, "n and C must be positive");
  if (static_cast<long long>(header.size()) != 2 + c)
    fail(path, lines[0].number, "expected " + std::to_string(c) + " class names");
  if (static_cast<long long>(lines.size()) != 1 + 3 * c)
    throw DataError(path.string() + ": expected " + std::to_string(3 * c) + " score rows, found " +
                    std::to_string(lines.size() - 1));
  ScoreFile file;
  file.class_names.assign(header.begin() + 2, header.end());
  for (long long k = 0; k < c; ++k) {
    PartScores s(n);
    for (int part = 0; part < kNumParts; ++part) {
      const auto& line = lines[1 + k * kNumParts + part];
      const auto toks = split_ws(line.text);
      if (static_cast<long long>(toks.size()) != n)
        fail(path, line.number, "expected " + std::to_string(n) + " scores, got " + std::to_string(toks.size()));
      auto& track = s.track(static_cast<Part>(part));
      for (long long t = 0; t < n; ++t) track(t) = parse_double(toks[t], path, line.number);
    }
    file.scores.push_back(std::move(s));
  }
  return file;
}

void write_scores(const fs::path& path, const ScoreFile& file) {
  if (file.scores.empty() || file.scores.size() != file.class_names.size())
    throw std::invalid_argument("score file needs one name per class");
  const auto n = file.scores.front().size();
  std::string out = std::to_string(n) + " " + std::to_string(file.scores.size());
  for (const auto& name : file.class_names) out += " " + name;
  out += "\n";
  for (const auto& s : file.scores) {
    if (s.size() != n) throw std::invalid_argument("class score tracks differ in length");
    for (Part p : {Part::Start, Part::Middle, Part::End}) write_row(out, s.track(p));
  }
  write_text_file(path, out);
}

std::vector<ManifestEntry> read_manifest(const fs::path& path) {
  const auto base = path.parent_path();
  std::vector<ManifestEntry> out;
  for (const auto& line : content_lines(read_text_file(path))) {
    const auto f = split_tabs(line.text);
    if (f.size() != 2 && f.size() != 5)
      fail(path, line.number, "expected 'id<TAB>path' or 'id<TAB>path<TAB>start<TAB>end<TAB>class'");
    ManifestEntry e;
    e.id = f[0];
    e.path = fs::path(f[1]).is_absolute() ? fs::path(f[1]) : base / f[1];
    if (f.size() == 5) {
      e.gt = parse_window(f[2], f[3], path, line.number);
      e.class_name = f[4];
    }
    if (e.id.empty() || f[1].empty()) fail(path, line.number, "empty id or path");
    out.push_back(std::move(e));
  }
  return out;
}

void write_manifest(const fs::path& path, const std::vector<ManifestEntry>& entries) {
  const bool labelled = !entries.empty() && entries.front().gt.has_value();
  std::string out = labelled ? "# id\tpath\tstart\tend\tclass\n" : "# id\tpath\n";
  for (const auto& e : entries) {
    out += e.id + "\t" + e.path.generic_string();
    if (e.gt) out += "\t" + std::to_string(e.gt->start) + "\t" + std::to_string(e.gt->end) + "\t" + e.class_name;
    out += "\n";
  }
  write_text_file(path, out);
}

std::vector<Annotation> read_annotations(const fs::path& path) {
  std::vector<Annotation> out;
  for (const auto& line : content_lines(read_text_file(path))) {
    const auto f = split_tabs(line.text);
    if (f.size() != 4) fail(path, line.number, "expected 'video_id<TAB>class<TAB>start<TAB>end'");
    out.push_back({f[0], f[1], parse_window(f[2], f[3], path, line.number)});
  }
  return out;
}

void write_annotations(const fs::path& path, const std::vector<Annotation>& rows) {
  std::string out = "# video_id\tclass\tstart\tend\n";
  for (const auto& a : rows)
    out += a.video_id + "\t" + a.class_name + "\t" + std::to_string(a.window.start) + "\t" +
           std::to_string(a.window.end) + "\n";
  write_text_file(path, out);
}

void write_detections(std::ostream& out, const std::vector<DetectionRecord>& rows, double fps) {
  out << "# video_id\tclass\tstart_frame\tend_frame\tstart_sec\tend_sec\tscore\n";
  for (const auto& r : rows)
    out << r.video_id << '\t' << r.class_name << '\t' << r.window.start << '\t' << r.window.end << '\t'
        << format_fixed((r.window.start - 1) / fps, 6) << '\t' << format_fixed(r.window.end / fps, 6) << '\t'
        << format_fixed(r.score, 6) << '\n';
}

std::vector<DetectionRecord> read_detections(const fs::path& path) {
  std::vector<DetectionRecord> out;
  for (const auto& line : content_lines(read_text_file(path))) {
    const auto f = split_tabs(line.text);
    if (f.size() != 7) fail(path, line.number, "expected 7 tab-separated detection fields");
    out.push_back({f[0], f[1], parse_window(f[2], f[3], path, line.number), parse_double(f[6], path, line.number)});
  }
  return out;
}

void write_ap_table(std::ostream& out, const EvalResult& result, const std::vector<std::string>& class_names) {
  out << "# sigma";
  for (double s : result.sigmas) out << '\t' << format_fixed(s, 2);
  out << '\n';
  for (std::size_t i = 0; i < result.classes.size(); ++i) {
    const int c = result.classes[i];
    out << (c >= 0 && c < static_cast<int>(class_names.size()) ? class_names[c] : std::to_string(c));
    for (double ap : result.ap[i]) out << '\t' << format_fixed(ap, 6);
    out << '\n';
  }
  out << "mAP";
  for (double m : result.mean_ap) out << '\t' << format_fixed(m, 6);
  out << '\n';
}

void write_history(std::ostream& out, const std::vector<EpochStats>& history) {
  out << "# epoch\tloc_loss\tcls_loss\ttotal\n";
  for (const auto& h : history)
    out << h.epoch << '\t' << format_double(h.loc_loss) << '\t' << format_double(h.cls_loss) << '\t'
        << format_double(h.total) << '\n';
}

std::string priors_to_string(const std::vector<DurationPrior>& priors, const std::vector<std::string>& class_names) {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& p : priors)
    list.push_back({{"class", class_names.at(p.class_id)}, {"log_mean", p.log_mean}, {"log_std", p.log_std}});
  nlohmann::json doc = {{"format", "smsloc-duration-priors"}, {"version", 1}, {"priors", list}};
  return doc.dump(1) + "\n";
}

std::vector<std::optional<DurationPrior>> priors_from_string(const std::string& text,
                                                             const std::vector<std::string>& class_names) {
  std::vector<std::optional<DurationPrior>> out(class_names.size());
  try {
    const auto doc = nlohmann::json::parse(text);
    if (doc.at("format") != "smsloc-duration-priors" || doc.at("version") != 1)
      throw DataError("not a version 1 duration prior document");
    for (const auto& p : doc.at("priors")) {
      const auto name = p.at("class").get<std::string>();
      for (std::size_t c = 0; c < class_names.size(); ++c)
        if (class_names[c] == name)
          out[c] = DurationPrior{static_cast<int>(c), p.at("log_mean").get<double>(),
                                 std::max(kMinLogStd, p.at("log_std").get<double>())};
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed duration priors: ") + e.what());
  }
  return out;
}

}  // namespace smsloc
