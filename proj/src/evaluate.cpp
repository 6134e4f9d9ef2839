#include "terraclass/evaluate.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>

#include "terraclass/error.hpp"
#include "terraclass/parallel.hpp"
#include "seed_stream.hpp"

namespace terraclass {

// ---------------------------------------------------------------- split plane

double SplitPlane::project(const Vec3& p) const { return p.x * std::cos(theta) + p.y * std::sin(theta); }

double split_angle(std::size_t k, std::size_t n_angles) {
  return static_cast<double>(k) * std::numbers::pi / static_cast<double>(n_angles);
}

double split_offset(double lo, double hi, std::size_t j, std::size_t n_offsets) {
  if (n_offsets == 1) return lo + (hi - lo) * 0.5;
  return lo + (hi - lo) * (static_cast<double>(j) / static_cast<double>(n_offsets - 1));
}

namespace {

std::array<std::size_t, kNumClasses> labeled_totals(const PointCloud& cloud) {
  if (!cloud.has_labels()) throw std::invalid_argument("split-plane search needs a labeled cloud");
  std::array<std::size_t, kNumClasses> totals{};
  for (const Point& p : cloud.points())
    if (p.label < kNumClasses) ++totals[p.label];
  if (std::all_of(totals.begin(), totals.end(), [](std::size_t n) { return n == 0; }))
    throw std::invalid_argument("split-plane search needs at least one labeled point");
  return totals;
}

double objective_from(const std::array<std::size_t, kNumClasses>& positive,
                      const std::array<std::size_t, kNumClasses>& totals) {
  double worst = 0.0;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    if (!totals[c]) continue;
    const double f = static_cast<double>(positive[c]) / static_cast<double>(totals[c]);
    worst = std::max(worst, std::abs(f - 0.5));
  }
  return worst;
}

}  // namespace

double split_objective(const PointCloud& cloud, const SplitPlane& plane) {
  const auto totals = labeled_totals(cloud);
  std::array<std::size_t, kNumClasses> positive{};
  for (const Point& p : cloud.points())
    if (p.label < kNumClasses && plane.positive(p.pos)) ++positive[p.label];
  return objective_from(positive, totals);
}

SplitSearchResult find_split_plane(const PointCloud& cloud, std::size_t n_angles, std::size_t n_offsets,
                                   unsigned threads) {
  if (n_angles < 1 || n_offsets < 1) throw std::invalid_argument("split grid needs at least one angle and offset");
  const auto totals = labeled_totals(cloud);

  std::vector<SplitSearchResult> per_angle(n_angles);
  parallel_for(n_angles, threads, 1, [&](std::size_t b, std::size_t e) {
    std::vector<std::pair<double, Label>> proj;
    proj.reserve(cloud.size());
    for (std::size_t k = b; k < e; ++k) {
      SplitPlane plane{split_angle(k, n_angles), 0.0};
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      proj.clear();
      for (const Point& p : cloud.points()) {
        const double v = plane.project(p.pos);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        if (p.label < kNumClasses) proj.emplace_back(v, p.label);
      }
      std::sort(proj.begin(), proj.end());

      std::array<std::size_t, kNumClasses> below{};
      std::array<std::size_t, kNumClasses> positive{};
      std::size_t next = 0;
      SplitSearchResult best;
      best.objective = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < n_offsets; ++j) {
        const double d = split_offset(lo, hi, j, n_offsets);
        while (next < proj.size() && proj[next].first < d) ++below[proj[next++].second];
        for (std::size_t c = 0; c < kNumClasses; ++c) positive[c] = totals[c] - below[c];
        const double obj = objective_from(positive, totals);
        if (obj < best.objective) best = {{plane.theta, d}, obj, k, j};
      }
      per_angle[k] = best;
    }
  });

  SplitSearchResult best = per_angle[0];
  for (std::size_t k = 1; k < n_angles; ++k)
    if (per_angle[k].objective < best.objective) best = per_angle[k];
  return best;
}

std::pair<PointCloud, PointCloud> split_cloud(const PointCloud& cloud, const SplitPlane& plane) {
  PointCloud pos({}, cloud.has_color(), cloud.has_labels());
  PointCloud neg({}, cloud.has_color(), cloud.has_labels());
  for (const Point& p : cloud.points()) (plane.positive(p.pos) ? pos : neg).push_back(p);
  return {std::move(pos), std::move(neg)};
}

// ---------------------------------------------------------------- sampling

SampleResult balanced_sample(const PointCloud& cloud, std::size_t per_class, std::uint64_t seed) {
  if (!cloud.has_labels()) throw std::invalid_argument("balanced sampling needs a labeled cloud");
  std::array<std::vector<std::size_t>, kNumClasses> members;
  for (std::size_t i = 0; i < cloud.size(); ++i)
    if (cloud[i].label < kNumClasses) members[cloud[i].label].push_back(i);

  SampleResult out;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    auto& m = members[c];
    const std::string name(class_name(static_cast<Label>(c)));
    if (m.size() <= per_class) {
      if (m.empty())
        out.warnings.push_back("class " + name + " absent");
      else if (m.size() < per_class)
        out.warnings.push_back("class " + name + " has only " + std::to_string(m.size()) + " of " +
                               std::to_string(per_class) + " requested points");
    } else {
      std::mt19937_64 rng(detail::stream_seed(seed, 0x42414C, c));
      for (std::size_t i = 0; i < per_class; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, m.size() - 1);
        std::swap(m[i], m[pick(rng)]);
      }
      m.resize(per_class);
    }
    out.per_class[c] = m.size();
    out.indices.insert(out.indices.end(), m.begin(), m.end());
  }
  std::sort(out.indices.begin(), out.indices.end());
  return out;
}

// ---------------------------------------------------------------- confusion

void ConfusionMatrix::add(Label truth, Label predicted) {
  if (truth >= kNumClasses || predicted >= kNumClasses)
    throw std::invalid_argument("confusion matrix labels must be class ids 0..5");
  ++counts_[truth][predicted];
}

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t n = 0;
  for (const auto& row : counts_) n = std::accumulate(row.begin(), row.end(), n);
  return n;
}

std::uint64_t ConfusionMatrix::correct() const {
  std::uint64_t n = 0;
  for (std::size_t c = 0; c < kNumClasses; ++c) n += counts_[c][c];
  return n;
}

double ConfusionMatrix::fraction(Label truth, Label predicted) const {
  const auto n = total();
  return n ? static_cast<double>(counts_[truth][predicted]) / static_cast<double>(n) : 0.0;
}

double ConfusionMatrix::overall_error() const {
  const auto n = total();
  return n ? static_cast<double>(n - correct()) / static_cast<double>(n) : 0.0;
}

double ConfusionMatrix::class_error(Label truth) const {
  const auto n = total();
  if (!n) return 0.0;
  const auto& row = counts_[truth];
  const std::uint64_t wrong = std::accumulate(row.begin(), row.end(), std::uint64_t{0}) - row[truth];
  return static_cast<double>(wrong) / static_cast<double>(n);
}

ConfusionMatrix confusion_matrix(std::span<const Label> truth, std::span<const Label> predicted) {
  if (truth.size() != predicted.size()) throw std::invalid_argument("label sequences differ in length");
  ConfusionMatrix m;
  for (std::size_t i = 0; i < truth.size(); ++i) m.add(truth[i], predicted[i]);
  return m;
}

EvaluationResult evaluate_model(const Ensemble& model, const PointCloud& test, const PipelineConfig& config) {
  if (!test.has_labels()) throw std::invalid_argument("test cloud is unlabeled");
  std::vector<Label> truth(test.size());
  for (std::size_t i = 0; i < test.size(); ++i) {
    truth[i] = test[i].label;
    if (truth[i] >= kNumClasses) throw std::invalid_argument("test cloud has unlabeled points");
  }
  PredictResult p = run_predict(model, test, config);
  std::vector<Label> pred(test.size());
  for (std::size_t i = 0; i < test.size(); ++i) pred[i] = p.cloud[i].label;
  return {confusion_matrix(truth, pred), p.timing};
}

// ---------------------------------------------------------------- report

namespace {

constexpr std::string_view kReportMagic = "terraclass-report v1";

std::string fmt(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void check_token(const std::string& s, const char* what) {
  if (s.empty() || s.find_first_of(" \t\n\r") != std::string::npos)
    throw std::invalid_argument(std::string(what) + " must be a non-empty token without whitespace: '" + s + "'");
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace

std::string format_report(const Report& report) {
  std::string out(kReportMagic);
  out += "\ntrain_sets: ";
  for (std::size_t i = 0; i < report.train_sets.size(); ++i) {
    const auto& s = report.train_sets[i];
    if (s.empty() || s.find_first_of(",\n\r") != std::string::npos)
      throw std::invalid_argument("train set name must be non-empty without commas or newlines: '" + s + "'");
    out += (i ? "," : "") + s;
  }
  if (report.test_set.find_first_of("\n\r") != std::string::npos)
    throw std::invalid_argument("test set name contains a newline");
  out += "\ntest_set: " + report.test_set;
  out += "\nrows: " + std::to_string(report.rows.size()) + "\n\n";

  out += "feature_set classifier overall_error wall_time_s";
  for (std::size_t c = 0; c < kNumClasses; ++c) out += " err_" + std::string(class_name(static_cast<Label>(c)));
  out += '\n';
  for (const ReportRow& r : report.rows) {
    check_token(r.feature_set, "feature set");
    check_token(r.classifier, "classifier");
    out += r.feature_set + ' ' + r.classifier + ' ' + fmt(r.overall_error) + ' ' + fmt(r.wall_time_s);
    for (std::size_t c = 0; c < kNumClasses; ++c) out += ' ' + fmt(r.confusion.class_error(static_cast<Label>(c)));
    out += '\n';
  }
  for (const ReportRow& r : report.rows) {
    out += "\nconfusion " + r.feature_set + ' ' + r.classifier + '\n';
    for (std::size_t t = 0; t < kNumClasses; ++t) {
      out += class_name(static_cast<Label>(t));
      for (std::size_t p = 0; p < kNumClasses; ++p)
        out += ' ' + std::to_string(r.confusion.count(static_cast<Label>(t), static_cast<Label>(p)));
      out += '\n';
    }
  }
  return out;
}

Report parse_report(std::string_view text) {
  std::vector<std::string_view> lines;
  std::vector<std::size_t> numbers;
  {
    std::size_t b = 0, no = 0;
    while (b < text.size()) {
      std::size_t e = text.find('\n', b);
      if (e == std::string_view::npos) e = text.size();
      ++no;
      std::string_view l = text.substr(b, e - b);
      if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
      if (!l.empty()) {
        lines.push_back(l);
        numbers.push_back(no);
      }
      b = e + 1;
    }
  }
  std::size_t at = 0;
  auto fail = [&](const std::string& msg) -> void {
    const std::size_t no = at < numbers.size() ? numbers[at] : (numbers.empty() ? 0 : numbers.back());
    throw ParseError("report line " + std::to_string(no) + ": " + msg);
  };
  auto next = [&]() -> std::string_view {
    if (at >= lines.size()) fail("unexpected end of report");
    return lines[at++];
  };
  auto header = [&](std::string_view key) -> std::string_view {
    std::string_view l = next();
    if (l.substr(0, key.size()) != key || l.size() < key.size() + 1 || l[key.size()] != ':') {
      --at;
      fail("expected '" + std::string(key) + ":'");
    }
    l.remove_prefix(key.size() + 1);
    if (!l.empty() && l.front() == ' ') l.remove_prefix(1);
    return l;
  };
  auto number = [&](std::string_view s, auto& v) {
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
      --at;
      fail("invalid number '" + std::string(s) + "'");
    }
  };

  if (next() != kReportMagic) {
    --at;
    fail("not a terraclass report (or unsupported version)");
  }
  Report report;
  {
    std::string_view sets = header("train_sets");
    std::size_t b = 0;
    while (!sets.empty() && b <= sets.size()) {
      std::size_t e = sets.find(',', b);
      if (e == std::string_view::npos) e = sets.size();
      report.train_sets.emplace_back(sets.substr(b, e - b));
      b = e + 1;
    }
  }
  report.test_set = std::string(header("test_set"));
  std::size_t n_rows = 0;
  number(header("rows"), n_rows);

  const auto columns = split_ws(next());
  if (columns.size() != 4 + kNumClasses || columns[0] != "feature_set") {
    --at;
    fail("malformed table header");
  }
  report.rows.resize(n_rows);
  for (ReportRow& r : report.rows) {
    const auto tok = split_ws(next());
    if (tok.size() != 4 + kNumClasses) {
      --at;
      fail("table row needs " + std::to_string(4 + kNumClasses) + " fields");
    }
    r.feature_set = std::string(tok[0]);
    r.classifier = std::string(tok[1]);
    number(tok[2], r.overall_error);
    number(tok[3], r.wall_time_s);
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      double ignored = 0.0;
      number(tok[4 + c], ignored);
    }
  }
  for (ReportRow& r : report.rows) {
    const auto head = split_ws(next());
    if (head.size() != 3 || head[0] != "confusion" || head[1] != r.feature_set || head[2] != r.classifier) {
      --at;
      fail("expected 'confusion " + r.feature_set + " " + r.classifier + "'");
    }
    ConfusionMatrix::Counts counts{};
    for (std::size_t t = 0; t < kNumClasses; ++t) {
      const auto tok = split_ws(next());
      if (tok.size() != kNumClasses + 1 || tok[0] != class_name(static_cast<Label>(t))) {
        --at;
        fail("malformed confusion row");
      }
      for (std::size_t p = 0; p < kNumClasses; ++p) number(tok[p + 1], counts[t][p]);
    }
    r.confusion = ConfusionMatrix(counts);
  }
  if (at != lines.size()) fail("trailing content");
  return report;
}

// ---------------------------------------------------------------- ablation

Report ablation_run(std::span<const NamedCloud> train_clouds, const NamedCloud& test,
                    std::span<const FeatureSetSpec> feature_sets, std::span<const ModelKind> classifiers,
                    const PipelineConfig& config) {
  if (train_clouds.empty()) throw std::invalid_argument("ablation needs at least one training cloud");
  if (feature_sets.empty() || classifiers.empty())
    throw std::invalid_argument("ablation needs at least one feature set and one classifier");
  if (!test.cloud || !test.cloud->has_labels()) throw std::invalid_argument("test cloud must be labeled");

  PipelineConfig base = config;
  base.features = feature_sets[0];
  for (const auto& fs : feature_sets) base.features = base.features.unite(fs);
  base.validate();

  // Pooled training rows and the full test matrix for the union feature set.
  std::vector<const PointCloud*> clouds;
  for (const auto& c : train_clouds) {
    if (!c.cloud) throw std::invalid_argument("null training cloud");
    clouds.push_back(c.cloud);
  }
  FeatureMatrix train_all(base.columns(), 0, base.features.to_string());
  std::vector<Label> train_labels;
  for (std::size_t i = 0; i < clouds.size(); ++i) {
    if (!clouds[i]->has_labels()) throw std::invalid_argument("training cloud '" + train_clouds[i].name + "' is unlabeled");
    const SampleResult s = balanced_sample(*clouds[i], base.per_class, detail::stream_seed(base.seed, 0x53414D50, i));
    FeatureExtractor fx(*clouds[i], base);
    train_all.append(fx.extract(s.indices));
    for (std::size_t idx : s.indices) train_labels.push_back((*clouds[i])[idx].label);
  }
  std::vector<Label> truth(test.cloud->size());
  for (std::size_t i = 0; i < truth.size(); ++i) {
    truth[i] = (*test.cloud)[i].label;
    if (truth[i] >= kNumClasses) throw std::invalid_argument("test cloud has unlabeled points");
  }
  const FeatureMatrix test_all = extract_features(*test.cloud, base);

  Report report;
  for (const auto& c : train_clouds) report.train_sets.push_back(c.name);
  report.test_set = test.name;
  for (const auto& fs : feature_sets) {
    const auto cols = fs.columns(base.n_levels);
    const FeatureMatrix xtr = train_all.reorder(cols);
    const FeatureMatrix xte = test_all.reorder(cols);
    for (ModelKind kind : classifiers) {
      const auto t0 = std::chrono::steady_clock::now();
      const Ensemble model = train(kind, xtr, train_labels, base.effective_train_config());
      const Prediction p = model.predict(xte, base.threads);
      ReportRow row;
      row.feature_set = fs.to_string();
      row.classifier = std::string(model_kind_name(kind));
      row.confusion = confusion_matrix(truth, p.labels);
      row.overall_error = row.confusion.overall_error();
      row.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

}  // namespace terraclass
