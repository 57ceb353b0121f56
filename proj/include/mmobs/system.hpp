#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mmobs/decomp.hpp"
#include "mmobs/embed.hpp"
#include "mmobs/expr.hpp"
#include "mmobs/interval.hpp"
#include "mmobs/numerics.hpp"
#include "mmobs/sim.hpp"

namespace mmobs {

/// A plant definition as read from a system file.
struct SystemSpec {
  std::string name;
  embed::TimeDomain time = embed::TimeDomain::DT;
  std::vector<std::pair<std::string, double>> params;  // in file order
  std::vector<std::string> states;
  std::size_t l = 0;
  std::vector<std::string> f_source;  // right-hand sides as written
  std::vector<std::string> h_source;
  std::vector<expr::Expr> f;
  std::vector<expr::Expr> h;
  Box domain;
  Box x0;
  std::optional<Matrix> transform;  // z = T x
  std::optional<Matrix> prek;       // n x l, f - K h is split and K y re-injected

  [[nodiscard]] std::size_t n() const { return states.size(); }
};

bool operator==(const SystemSpec& a, const SystemSpec& b);

// Throws FileParseError (line/column) and Error(ValidationError).
SystemSpec parse_system(const std::string& text);
SystemSpec load_system(const std::string& path);
std::string write_system(const SystemSpec& spec);

// Names of the systems compiled into the library.
std::vector<std::string> bundled_system_names();
std::optional<std::string> bundled_system_text(const std::string& name);

// A path to a system file, or the name of a bundled system.
SystemSpec resolve_system(const std::string& path_or_name);

/// The plant in the coordinates the observer runs in.
///
/// With a transform T the working state is z = T x; boxes are outer
/// enclosures of their images. `f_observer` is f - K h (both mapped), which is
/// what gets split; `f_true` is the plant itself.
struct WorkingSystem {
  embed::TimeDomain time = embed::TimeDomain::DT;
  std::size_t n = 0;
  std::size_t l = 0;
  std::vector<expr::Expr> f_observer;
  std::vector<expr::Expr> f_true;
  std::vector<expr::Expr> h;
  Box domain;
  Box x0;
  std::optional<Matrix> transform;
  std::optional<Matrix> inverse_transform;
  std::optional<Matrix> pre_gain;  // T K
};

WorkingSystem prepare(const SystemSpec& spec);

struct Splits {
  decomp::JssSplit phi;
  decomp::JssSplit psi;
};

Splits split_system(const WorkingSystem& w, const decomp::Strategy& strategy = decomp::Strategy::upper());
embed::ObserverSystem build_observer(const WorkingSystem& w, const Splits& s, const Matrix& gain);
sim::Plant build_plant(const WorkingSystem& w);

/// Gain plus whatever certificate data accompanied it.
struct GainFile {
  std::string system;
  std::map<std::string, Matrix> matrices;  // always contains "L"
  std::map<std::string, double> scalars;
  std::map<std::string, std::string> strings;

  [[nodiscard]] const Matrix& gain() const { return matrices.at("L"); }
};

void write_gain(std::ostream& os, const GainFile& g);
GainFile read_gain(std::istream& is);

// Published reference gains for the bundled systems (keyword "paper"), in working coordinates.
std::optional<Matrix> builtin_gain(const std::string& system, const std::string& which);

// `spec` is a gain file path or one of the keywords "paper" and "zero".
Matrix resolve_gain(const std::string& spec, const SystemSpec& system);

// CSV with header t,xbar_i,xlow_i,eps_i,eps_inf[,xtrue_i].
void write_csv(std::ostream& os, const sim::TrajectoryLog& log, std::size_t n);

// Same log in original coordinates: framers as the outer box of T^-1 [lower, upper].
sim::TrajectoryLog to_original(const sim::TrajectoryLog& log, const Matrix& inverse_transform);

}  // namespace mmobs
