#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "wgplvm/manifolds.hpp"

namespace wgplvm {

struct Dataset {
  Manifold manifold = Manifold::euclidean(1);
  std::vector<Point> points;
  // Empty, or one entry per point.
  std::vector<std::string> labels;
  // "timestamp", "species", "label", ...
  std::string label_name;
  std::string provenance;

  std::size_t size() const { return points.size(); }
};

// CSV conventions shared by every loader: comma separated, '.' decimal point,
// blank lines and lines starting with '#' are ignored. Errors are DataError
// with the 1-based line number.

// One direction per row: x,y,z[,label]. Rows whose norm is within 1e-6 of one
// are normalized, anything else is rejected. Without a label column the row
// index is used as timestamp.
Dataset read_directions(std::istream& in, const std::string& provenance = "stream");
Dataset load_directions(const std::filesystem::path& path);

// One shape per row: x1,y1,...,xk,yk[,species]. Shapes are centered, scaled to
// unit norm and rotated onto the shape at `reference_index`.
Dataset read_landmarks(std::istream& in, int reference_index, const std::string& provenance = "stream");
Dataset load_landmarks(const std::filesystem::path& path, int reference_index);

// One matrix per row: the n(n+1)/2 upper-triangle entries in row-major order,
// unscaled, optionally followed by a label. Non-SPD rows are rejected.
Dataset read_spd(std::istream& in, int n, const std::string& provenance = "stream");
Dataset load_spd(const std::filesystem::path& path, int n);

// Plain real vectors, one per row, on Euclidean(width). No label column.
Dataset read_vectors(std::istream& in, const std::string& provenance = "stream");
Dataset load_vectors(const std::filesystem::path& path);

// T x A matrix of prices, one time step per row.
Eigen::MatrixXd read_prices(std::istream& in);
Eigen::MatrixXd load_prices(const std::filesystem::path& path);
// (T-1) x A matrix of log(p[t+1] / p[t]).
Eigen::MatrixXd log_returns(const Eigen::MatrixXd& prices);

// Unbiased covariance of rows [t - window, t) for t = window, window + stride,
// ... <= T, plus 1e-8 * mean(diag) * I. Labels hold t.
Dataset rolling_covariances(const Eigen::MatrixXd& prices, int window, int stride);
int rolling_window_count(int num_rows, int window, int stride);

// FA of an SpdLogEuclidean(3) point, in [0, 1].
double fractional_anisotropy(const Point& p);

// Seeded uniform shuffle, then the first round(train_fraction * N) go to train.
struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};
SplitIndices split_indices(std::size_t n, double train_fraction, std::uint64_t seed);
Dataset subset(const Dataset& d, const std::vector<std::size_t>& indices);
std::pair<Dataset, Dataset> split(const Dataset& d, double train_fraction, std::uint64_t seed);

// Writers for the loader formats above. `labels` may be empty.
void write_directions(std::ostream& out, const std::vector<Eigen::VectorXd>& rows,
                      const std::vector<std::string>& labels);
void write_landmarks(std::ostream& out, const std::vector<Eigen::VectorXd>& rows,
                     const std::vector<std::string>& labels);
void write_spd(std::ostream& out, const std::vector<Eigen::MatrixXd>& matrices, const std::vector<std::string>& labels);

}  // namespace wgplvm
