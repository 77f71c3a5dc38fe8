#include "wgplvm/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "wgplvm/errors.hpp"
#include "wgplvm/spd.hpp"

namespace wgplvm {

namespace {

struct Row {
  int line = 0;
  std::vector<std::string> fields;
};

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<Row> read_rows(std::istream& in) {
  std::vector<Row> rows;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    Row row;
    row.line = number;
    std::stringstream ss(t);
    std::string field;
    while (std::getline(ss, field, ',')) row.fields.push_back(trim(field));
    if (!t.empty() && t.back() == ',') row.fields.emplace_back();
    rows.push_back(std::move(row));
  }
  return rows;
}

double parse_number(const std::string& field, int line) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || field.empty() || !std::isfinite(value)) {
    throw DataError("'" + field + "' is not a finite number", line);
  }
  return value;
}

Eigen::VectorXd parse_numbers(const Row& row, std::size_t count) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(count));
  for (std::size_t i = 0; i < count; ++i) v(static_cast<Eigen::Index>(i)) = parse_number(row.fields[i], row.line);
  return v;
}

std::ifstream open(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

void write_label(std::ostream& out, const std::vector<std::string>& labels, std::size_t i) {
  if (!labels.empty()) out << ',' << labels[i];
}

void write_values(std::ostream& out, const Eigen::VectorXd& v) {
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (k > 0) out << ',';
    out << v(k);
  }
}

}  // namespace

Dataset read_directions(std::istream& in, const std::string& provenance) {
  Dataset d;
  d.manifold = Manifold::sphere(2);
  d.label_name = "timestamp";
  d.provenance = provenance;
  for (const Row& row : read_rows(in)) {
    if (row.fields.size() != 3 && row.fields.size() != 4) {
      throw DataError("expected 3 coordinates and an optional label", row.line);
    }
    Eigen::VectorXd v = parse_numbers(row, 3);
    const double n = v.norm();
    if (std::abs(n - 1.0) > 1e-6) {
      std::ostringstream msg;
      msg << "not a direction (norm " << n << ")";
      throw DataError(msg.str(), row.line);
    }
    d.points.push_back(Point{v / n});
    d.labels.push_back(row.fields.size() == 4 ? row.fields[3] : std::to_string(d.points.size() - 1));
  }
  return d;
}

Dataset load_directions(const std::filesystem::path& path) {
  auto in = open(path);
  return read_directions(in, path.string());
}

Dataset read_landmarks(std::istream& in, int reference_index, const std::string& provenance) {
  const std::vector<Row> rows = read_rows(in);
  if (rows.empty()) throw DataError("no shapes in input");
  const std::size_t width = rows.front().fields.size();
  const bool labelled = width % 2 == 1;
  const std::size_t coords = labelled ? width - 1 : width;
  if (coords < 6) throw DataError("a shape needs at least 3 landmarks", rows.front().line);

  Dataset d;
  d.manifold = Manifold::kendall2d(static_cast<int>(coords / 2));
  d.label_name = "species";
  d.provenance = provenance;
  for (const Row& row : rows) {
    if (row.fields.size() != width) throw DataError("inconsistent landmark count", row.line);
    const Eigen::VectorXd raw = parse_numbers(row, coords);
    Eigen::VectorXd centered = raw;
    centered(Eigen::seq(0, Eigen::last, 2)).array() -= raw(Eigen::seq(0, Eigen::last, 2)).mean();
    centered(Eigen::seq(1, Eigen::last, 2)).array() -= raw(Eigen::seq(1, Eigen::last, 2)).mean();
    const double size = centered.norm();
    if (!(size > 1e-12 * std::max(raw.cwiseAbs().maxCoeff(), 1.0))) {
      throw DataError("degenerate shape: all landmarks coincide", row.line);
    }
    centered /= size;
    d.points.push_back(Point{centered});
    d.labels.push_back(labelled ? row.fields.back() : std::string());
  }
  if (!labelled) d.labels.clear();

  if (reference_index < 0 || reference_index >= static_cast<int>(d.points.size())) {
    throw DataError("reference index " + std::to_string(reference_index) + " is out of range");
  }
  const Eigen::VectorXd reference = d.points[static_cast<std::size_t>(reference_index)].coords;
  for (Point& p : d.points) p.coords = align_rotation(reference, p.coords);
  return d;
}

Dataset load_landmarks(const std::filesystem::path& path, int reference_index) {
  auto in = open(path);
  return read_landmarks(in, reference_index, path.string());
}

Dataset read_spd(std::istream& in, int n, const std::string& provenance) {
  if (n < 1) throw DataError("matrix size must be >= 1");
  Dataset d;
  d.manifold = Manifold::spd(n);
  d.label_name = "label";
  d.provenance = provenance;
  const std::size_t entries = static_cast<std::size_t>(spd::coord_dim(n));
  bool labelled = false;
  for (const Row& row : read_rows(in)) {
    if (row.fields.size() != entries && row.fields.size() != entries + 1) {
      throw DataError("expected " + std::to_string(entries) + " upper-triangle entries and an optional label",
                      row.line);
    }
    const Eigen::MatrixXd m = spd::from_upper_unscaled(parse_numbers(row, entries), n);
    const double lo = spd::min_eigenvalue(m);
    if (!(lo > 1e-12)) {
      std::ostringstream msg;
      msg << "matrix is not positive definite (minimum eigenvalue " << lo << ")";
      throw DataError(msg.str(), row.line);
    }
    d.points.push_back(Point{spd::to_coords(m)});
    labelled = labelled || row.fields.size() == entries + 1;
    d.labels.push_back(row.fields.size() == entries + 1 ? row.fields.back() : std::string());
  }
  if (!labelled) d.labels.clear();
  return d;
}

Dataset load_spd(const std::filesystem::path& path, int n) {
  auto in = open(path);
  return read_spd(in, n, path.string());
}

Dataset read_vectors(std::istream& in, const std::string& provenance) {
  const std::vector<Row> rows = read_rows(in);
  if (rows.empty()) throw DataError("no rows in input");
  const std::size_t width = rows.front().fields.size();
  Dataset d;
  d.manifold = Manifold::euclidean(static_cast<int>(width));
  d.label_name = "index";
  d.provenance = provenance;
  for (const Row& row : rows) {
    if (row.fields.size() != width) throw DataError("inconsistent number of columns", row.line);
    d.points.push_back(Point{parse_numbers(row, width)});
    d.labels.push_back(std::to_string(d.points.size() - 1));
  }
  return d;
}

Dataset load_vectors(const std::filesystem::path& path) {
  auto in = open(path);
  return read_vectors(in, path.string());
}

Eigen::MatrixXd read_prices(std::istream& in) {
  const std::vector<Row> rows = read_rows(in);
  if (rows.empty()) throw DataError("no price rows in input");
  const std::size_t width = rows.front().fields.size();
  Eigen::MatrixXd prices(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].fields.size() != width) throw DataError("inconsistent number of assets", rows[r].line);
    prices.row(static_cast<Eigen::Index>(r)) = parse_numbers(rows[r], width).transpose();
  }
  return prices;
}

Eigen::MatrixXd load_prices(const std::filesystem::path& path) {
  auto in = open(path);
  return read_prices(in);
}

Eigen::MatrixXd log_returns(const Eigen::MatrixXd& prices) {
  if (prices.rows() < 2) throw DataError("log returns need at least two time steps");
  if ((prices.array() <= 0.0).any()) throw DataError("log returns need positive prices");
  return (prices.bottomRows(prices.rows() - 1).array() / prices.topRows(prices.rows() - 1).array()).log();
}

int rolling_window_count(int num_rows, int window, int stride) {
  if (window < 2 || stride < 1 || num_rows < window) return 0;
  return (num_rows - window) / stride + 1;
}

Dataset rolling_covariances(const Eigen::MatrixXd& prices, int window, int stride) {
  const int t_len = static_cast<int>(prices.rows());
  const int assets = static_cast<int>(prices.cols());
  if (assets < 2) throw DataError("rolling covariances need at least two assets");
  if (window < 2) throw DataError("window must be >= 2");
  if (stride < 1) throw DataError("stride must be >= 1");
  if (t_len < window) throw DataError("series is shorter than the window");

  Dataset d;
  d.manifold = Manifold::spd(assets);
  d.label_name = "timestamp";
  d.provenance = "rolling covariances (window " + std::to_string(window) + ", stride " + std::to_string(stride) + ")";
  for (int t = window; t <= t_len; t += stride) {
    const Eigen::MatrixXd block = prices.middleRows(t - window, window);
    const Eigen::MatrixXd centered = block.rowwise() - block.colwise().mean();
    Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(window - 1);
    const double mean_diag = cov.diagonal().mean();
    if (!(mean_diag > 0.0)) {
      throw DataError("window [" + std::to_string(t - window) + ", " + std::to_string(t) +
                      ") has an all-zero covariance");
    }
    cov += 1e-8 * mean_diag * Eigen::MatrixXd::Identity(assets, assets);
    if (!(spd::min_eigenvalue(cov) > 1e-12)) {
      throw DataError("window [" + std::to_string(t - window) + ", " + std::to_string(t) +
                      ") is not positive definite after jitter");
    }
    d.points.push_back(Point{spd::to_coords(cov)});
    d.labels.push_back(std::to_string(t));
  }
  return d;
}

double fractional_anisotropy(const Point& p) {
  const Eigen::MatrixXd m = spd::to_matrix(p.coords);
  if (m.rows() != 3) throw DimensionError("fractional anisotropy is defined for 3x3 tensors");
  const Eigen::VectorXd lambda = spd::eigenvalues(m);
  const double mean = lambda.mean();
  const double num = (lambda.array() - mean).matrix().norm();
  const double den = lambda.norm();
  return std::clamp(std::sqrt(1.5) * num / den, 0.0, 1.0);
}

SplitIndices split_indices(std::size_t n, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ConfigError("train fraction must lie in (0, 1)");
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  if (n_train == 0 || n_train >= n) throw DataError("split leaves one side empty");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  SplitIndices out;
  out.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  return out;
}

Dataset subset(const Dataset& d, const std::vector<std::size_t>& indices) {
  Dataset out;
  out.manifold = d.manifold;
  out.label_name = d.label_name;
  out.provenance = d.provenance;
  for (std::size_t i : indices) {
    out.points.push_back(d.points.at(i));
    if (!d.labels.empty()) out.labels.push_back(d.labels.at(i));
  }
  return out;
}

std::pair<Dataset, Dataset> split(const Dataset& d, double train_fraction, std::uint64_t seed) {
  const SplitIndices idx = split_indices(d.points.size(), train_fraction, seed);
  return {subset(d, idx.train), subset(d, idx.test)};
}

void write_directions(std::ostream& out, const std::vector<Eigen::VectorXd>& rows,
                      const std::vector<std::string>& labels) {
  out << "# x,y,z" << (labels.empty() ? "" : ",label") << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    write_values(out, rows[i]);
    write_label(out, labels, i);
    out << '\n';
  }
}

void write_landmarks(std::ostream& out, const std::vector<Eigen::VectorXd>& rows,
                     const std::vector<std::string>& labels) {
  out << "# x1,y1,...,xk,yk" << (labels.empty() ? "" : ",label") << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    write_values(out, rows[i]);
    write_label(out, labels, i);
    out << '\n';
  }
}

void write_spd(std::ostream& out, const std::vector<Eigen::MatrixXd>& matrices,
               const std::vector<std::string>& labels) {
  out << "# upper triangle, row-major" << (labels.empty() ? "" : ",label") << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < matrices.size(); ++i) {
    write_values(out, spd::to_upper_unscaled(matrices[i]));
    write_label(out, labels, i);
    out << '\n';
  }
}

}  // namespace wgplvm
