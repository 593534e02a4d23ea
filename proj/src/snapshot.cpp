#include "nmps/snapshot.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace nmps {

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

namespace {

void write_matrix(std::ostream& os, const char* tag, const Eigen::MatrixXd& m) {
  os << tag << " " << m.rows() << " " << m.cols() << "\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) os << " ";
      os << format_double(m(i, j));
    }
    os << "\n";
  }
}

class Reader {
 public:
  explicit Reader(const std::string& text) : in_(text) {}

  std::string expect_line(const std::string& tag) {
    std::string line;
    if (!std::getline(in_, line))
      throw std::runtime_error("snapshot: unexpected end of input, wanted '" + tag + "'");
    if (line.rfind(tag, 0) != 0)
      throw std::runtime_error("snapshot: expected '" + tag + "', got '" + line + "'");
    std::string rest = line.substr(tag.size());
    if (!rest.empty() && rest[0] == ' ') rest = rest.substr(1);
    return rest;
  }

  Eigen::MatrixXd read_matrix(const std::string& tag) {
    std::istringstream header(expect_line(tag));
    Eigen::Index rows = 0, cols = 0;
    if (!(header >> rows >> cols) || rows < 0 || cols < 0)
      throw std::runtime_error("snapshot: bad matrix header for '" + tag + "'");
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      std::string line;
      if (!std::getline(in_, line))
        throw std::runtime_error("snapshot: truncated matrix '" + tag + "'");
      std::istringstream row(line);
      for (Eigen::Index j = 0; j < cols; ++j)
        if (!(row >> m(i, j)))
          throw std::runtime_error("snapshot: bad matrix row in '" + tag + "'");
    }
    return m;
  }

 private:
  std::istringstream in_;
};

}  // namespace

std::string snapshot_to_string(const Snapshot& snap) {
  std::ostringstream os;
  os << "nmps-snapshot v" << snap.meta.version << "\n";
  os << "variant " << snap.meta.variant << "\n";
  os << "env " << snap.meta.env << "\n";
  os << "rho " << format_double(snap.meta.rho) << "\n";
  os << "seed " << snap.meta.seed << "\n";
  os << "step " << snap.meta.step << "\n";

  os << "feature_nonlinearity "
     << (snap.feature.nonlinearity == Nonlinearity::Tanh ? "tanh" : "linear") << "\n";
  os << "feature_trainable " << (snap.feature.trainable ? 1 : 0) << "\n";
  os << "feature_lr " << format_double(snap.feature.learning_rate) << "\n";
  write_matrix(os, "feature_weights", snap.feature.weights);

  const SuccessorTable& t = snap.table;
  os << "table_repr " << (t.repr == TableRepr::Tabular ? "tabular" : "linear") << "\n";
  os << "table_gamma " << format_double(t.gamma) << "\n";
  os << "table_lr " << format_double(t.learning_rate) << "\n";
  os << "table_dims " << t.feature_dim << " " << t.num_actions << " "
     << (t.repr == TableRepr::Tabular ? t.num_states : t.obs_dim) << "\n";
  if (t.repr == TableRepr::Tabular) {
    Eigen::MatrixXd packed(static_cast<Eigen::Index>(t.psi.size()), t.feature_dim);
    for (size_t i = 0; i < t.psi.size(); ++i)
      packed.row(static_cast<Eigen::Index>(i)) = t.psi[i].transpose();
    write_matrix(os, "table_psi", packed);
  } else {
    for (int a = 0; a < t.num_actions; ++a)
      write_matrix(os, "table_linear", t.linear[static_cast<size_t>(a)]);
  }
  os << "end\n";
  return os.str();
}

Snapshot snapshot_from_string(const std::string& text) {
  Reader reader(text);
  Snapshot snap;

  const std::string version = reader.expect_line("nmps-snapshot");
  if (version != "v1")
    throw std::runtime_error("snapshot: unsupported format version '" + version + "'");
  snap.meta.version = 1;
  snap.meta.variant = reader.expect_line("variant");
  snap.meta.env = reader.expect_line("env");
  snap.meta.rho = std::stod(reader.expect_line("rho"));
  snap.meta.seed = std::stoull(reader.expect_line("seed"));
  snap.meta.step = std::stol(reader.expect_line("step"));

  const std::string nonlin = reader.expect_line("feature_nonlinearity");
  if (nonlin != "tanh" && nonlin != "linear")
    throw std::runtime_error("snapshot: bad nonlinearity '" + nonlin + "'");
  snap.feature.nonlinearity = nonlin == "tanh" ? Nonlinearity::Tanh : Nonlinearity::Linear;
  snap.feature.trainable = reader.expect_line("feature_trainable") == "1";
  snap.feature.learning_rate = std::stod(reader.expect_line("feature_lr"));
  snap.feature.weights = reader.read_matrix("feature_weights");

  SuccessorTable& t = snap.table;
  const std::string repr = reader.expect_line("table_repr");
  if (repr != "tabular" && repr != "linear")
    throw std::runtime_error("snapshot: bad table repr '" + repr + "'");
  t.repr = repr == "tabular" ? TableRepr::Tabular : TableRepr::Linear;
  t.gamma = std::stod(reader.expect_line("table_gamma"));
  t.learning_rate = std::stod(reader.expect_line("table_lr"));
  {
    std::istringstream dims(reader.expect_line("table_dims"));
    int third = 0;
    if (!(dims >> t.feature_dim >> t.num_actions >> third))
      throw std::runtime_error("snapshot: bad table dims");
    if (t.repr == TableRepr::Tabular)
      t.num_states = third;
    else
      t.obs_dim = third;
  }
  if (t.repr == TableRepr::Tabular) {
    const Eigen::MatrixXd packed = reader.read_matrix("table_psi");
    if (packed.rows() != static_cast<Eigen::Index>(t.num_states) * t.num_actions ||
        packed.cols() != t.feature_dim)
      throw std::runtime_error("snapshot: psi shape mismatch");
    t.psi.assign(static_cast<size_t>(packed.rows()), Eigen::VectorXd(t.feature_dim));
    for (Eigen::Index i = 0; i < packed.rows(); ++i)
      t.psi[static_cast<size_t>(i)] = packed.row(i).transpose();
  } else {
    t.linear.clear();
    for (int a = 0; a < t.num_actions; ++a) {
      Eigen::MatrixXd m = reader.read_matrix("table_linear");
      if (m.rows() != t.feature_dim || m.cols() != t.obs_dim)
        throw std::runtime_error("snapshot: linear map shape mismatch");
      t.linear.push_back(std::move(m));
    }
  }
  reader.expect_line("end");
  return snap;
}

void save_snapshot(const Snapshot& snap, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_snapshot: cannot open " + path);
  out << snapshot_to_string(snap);
  if (!out) throw std::runtime_error("save_snapshot: write failed for " + path);
}

Snapshot load_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_snapshot: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return snapshot_from_string(buf.str());
}

}  // namespace nmps
