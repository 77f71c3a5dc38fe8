#include "wgplvm/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "wgplvm/errors.hpp"

namespace wgplvm {

namespace {

using nlohmann::json;

json vector_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vector_from(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(vector_json(m.row(i).transpose()));
  return rows;
}

Eigen::MatrixXd matrix_from(const json& j, Eigen::Index cols) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), cols);
  for (std::size_t i = 0; i < j.size(); ++i) {
    const Eigen::VectorXd row = vector_from(j[i]);
    if (row.size() != cols) throw DataError("checkpoint: ragged matrix");
    m.row(static_cast<Eigen::Index>(i)) = row.transpose();
  }
  return m;
}

json points_json(const std::vector<Point>& points) {
  json out = json::array();
  for (const Point& p : points) out.push_back(vector_json(p.coords));
  return out;
}

std::vector<Point> points_from(const json& j) {
  std::vector<Point> out;
  for (const json& row : j) out.push_back(Point{vector_from(row)});
  return out;
}

// Recursive descent over Manifold::name() output.
class NameParser {
 public:
  explicit NameParser(const std::string& text) : s_(text) {}

  Manifold parse() {
    Manifold m = manifold();
    if (pos_ != s_.size()) fail();
    return m;
  }

 private:
  Manifold manifold() {
    const auto open = s_.find('(', pos_);
    if (open == std::string::npos) fail();
    const std::string head = s_.substr(pos_, open - pos_);
    pos_ = open + 1;
    if (head == "Product") {
      std::vector<Manifold> factors{manifold()};
      while (peek() == ',') {
        ++pos_;
        factors.push_back(manifold());
      }
      expect(')');
      return Manifold::product(std::move(factors));
    }
    const auto close = s_.find(')', pos_);
    if (close == std::string::npos) fail();
    int n = 0;
    try {
      std::size_t used = 0;
      n = std::stoi(s_.substr(pos_, close - pos_), &used);
      if (used != close - pos_) fail();
    } catch (const std::logic_error&) {
      fail();
    }
    pos_ = close + 1;
    if (head == "Euclidean") return Manifold::euclidean(n);
    if (head == "Sphere") return Manifold::sphere(n);
    if (head == "Kendall2D") return Manifold::kendall2d(n);
    if (head == "SpdLogEuclidean") return Manifold::spd(n);
    fail();
  }

  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
  void expect(char c) {
    if (peek() != c) fail();
    ++pos_;
  }
  [[noreturn]] void fail() const { throw DataError("checkpoint: bad manifold descriptor '" + s_ + "'"); }

  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace

Manifold manifold_from_name(const std::string& name) { return NameParser(name).parse(); }

std::string checkpoint_to_json(const Checkpoint& c) {
  const ModelState& s = c.state;
  json trace = json::array();
  for (const TraceEntry& e : s.fit_trace) trace.push_back({e.iteration, e.objective});
  const json j = {
      {"version", kCheckpointVersion},
      {"kind", to_string(s.kind)},
      {"data_manifold", s.data_manifold.name()},
      {"manifold", s.manifold.name()},
      {"kernel",
       {{"family", to_string(s.kernel.family)},
        {"log_signal_var", s.kernel.log_signal_var},
        {"log_lengthscale_sq", s.kernel.log_lengthscale_sq},
        {"log_noise_var", s.kernel.log_noise_var}}},
      {"latent_dim", s.latent_dim()},
      {"basepoint", vector_json(s.basepoint.coords)},
      {"frame", matrix_json(s.frame.axes())},
      {"data", points_json(s.data)},
      {"labels", s.labels},
      {"label_name", s.label_name},
      {"tangent_data", matrix_json(s.tangent_data)},
      {"latents", matrix_json(s.latents)},
      {"trace", trace},
      {"heldout", points_json(c.heldout)},
      {"heldout_labels", c.heldout_labels},
  };
  return j.dump(1);
}

Checkpoint checkpoint_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    if (j.at("version").get<int>() != kCheckpointVersion) {
      throw DataError("checkpoint: unsupported version " + j.at("version").dump());
    }
    Checkpoint c;
    ModelState& s = c.state;
    s.kind = model_kind_from_string(j.at("kind").get<std::string>());
    s.data_manifold = manifold_from_name(j.at("data_manifold").get<std::string>());
    s.manifold = manifold_from_name(j.at("manifold").get<std::string>());
    const json& k = j.at("kernel");
    s.kernel.family = kernel_family_from_string(k.at("family").get<std::string>());
    s.kernel.log_signal_var = k.at("log_signal_var").get<double>();
    s.kernel.log_lengthscale_sq = k.at("log_lengthscale_sq").get<double>();
    s.kernel.log_noise_var = k.at("log_noise_var").get<double>();
    s.basepoint = Point{vector_from(j.at("basepoint"))};
    const Eigen::Index d = s.manifold.intrinsic_dim();
    Eigen::MatrixXd axes = matrix_from(j.at("frame"), d);
    if (axes.rows() != s.manifold.ambient_dim()) throw DataError("checkpoint: frame size mismatch");
    s.frame = TangentFrame(s.basepoint, std::move(axes));
    s.data = points_from(j.at("data"));
    s.labels = j.at("labels").get<std::vector<std::string>>();
    s.label_name = j.at("label_name").get<std::string>();
    s.tangent_data = matrix_from(j.at("tangent_data"), d);
    s.latents = matrix_from(j.at("latents"), j.at("latent_dim").get<int>());
    for (const json& e : j.at("trace")) s.fit_trace.push_back({e.at(0).get<int>(), e.at(1).get<double>()});
    c.heldout = points_from(j.at("heldout"));
    c.heldout_labels = j.at("heldout_labels").get<std::vector<std::string>>();

    const auto n = static_cast<Eigen::Index>(s.data.size());
    if (s.tangent_data.rows() != n || s.latents.rows() != n) throw DataError("checkpoint: row counts disagree");
    if (!s.labels.empty() && static_cast<Eigen::Index>(s.labels.size()) != n) {
      throw DataError("checkpoint: label count disagrees with data");
    }
    s.manifold.check_point(s.basepoint);
    for (const Point& p : s.data) s.data_manifold.check_point(p);
    for (const Point& p : c.heldout) s.data_manifold.check_point(p);
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("checkpoint: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("checkpoint: ") + e.what());
  } catch (const InvalidPointError& e) {
    throw DataError(std::string("checkpoint: ") + e.what());
  } catch (const DimensionError& e) {
    throw DataError(std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << checkpoint_to_json(c) << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return checkpoint_from_json(buffer.str());
}

}  // namespace wgplvm
