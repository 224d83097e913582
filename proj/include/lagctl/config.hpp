#ifndef LAGCTL_CONFIG_HPP
#define LAGCTL_CONFIG_HPP

#include "lagctl/verify.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace lagctl {

/// One `key = value` line. Quoted values are expressions.
struct ConfigEntry {
    std::string value;
    bool quoted = false;
    int line = 0;
};

/// Sections in file order; keys before the first header go to section "".
struct ConfigFile {
    std::map<std::string, std::map<std::string, ConfigEntry>> sections;
    std::string text;  // raw bytes, for hashing
};

/// Throws ParseError (offset = line number) on malformed lines or duplicates.
ConfigFile parse_config(const std::string& text);
ConfigFile read_config(const std::string& path);

/// Validation failures collected over the whole file.
class ConfigErrors : public ValidationError {
public:
    explicit ConfigErrors(std::vector<std::string> messages);
    const std::vector<std::string>& messages() const noexcept { return messages_; }

private:
    std::vector<std::string> messages_;
};

enum class Task { Reduce, Synthesize, Simulate, Sweep, Check, Shoot };

std::optional<Task> parse_task(const std::string& name);
std::string task_name(Task task);

struct SystemConfig {
    bool mechanical = true;
    int n = 0;
    int m = 0;
    std::vector<std::string> names;
    std::map<std::string, double> params;
    std::map<std::string, std::string> entries;  // "G.1.2" or "A.1.1" -> expression
};

struct PathConfig {
    bool present = false;
    std::vector<std::string> u_expr, w_expr;
    std::vector<double> grid;
    std::vector<std::vector<double>> u_samples, w_samples;
    double eps0 = 0.05;
    bool cutoff = true;
};

struct DictionaryConfig {
    bool present = false;
    double epsilon = 0.01;
    std::vector<Vector> vectors;
    std::size_t samples = 200;
    Vector q_lo, q_hi, u_lo, u_hi;
    double w_radius = 2.0;
    std::size_t max_generators = 64;
    int directions = 64;
};

struct CheckConfig {
    std::vector<std::string> q_expr, u_expr;
    double t0 = 0.0;
    double t1 = 1.0;
    std::size_t points = 201;
    double tol = 1e-6;
    bool difference_rates = false;
    std::optional<Vector> probe_q, probe_u, probe_dq, probe_du;
};

struct ShootConfig {
    Vector target_q, target_u;
    ShootOptions options;
    double radius = 10.0;
    double h = 1e-4;
};

/// Validated run configuration with defaults filled in.
struct RunConfig {
    Task task = Task::Simulate;
    std::uint64_t seed = 0;
    SystemConfig system;
    PathConfig path;
    std::vector<std::string> control_expr;  // direct u(t) for simulate
    Vector q0, p0;
    std::optional<Vector> u0;
    double T = 1.0;
    std::vector<double> T_list;
    std::size_t samples = 1001;  // rows of the synthesized control table
    std::optional<double> freq_override;
    std::optional<double> freq_scale;
    IntegratorConfig integrator;
    IntegratorConfig reference_integrator;
    DictionaryConfig dictionary;
    CheckConfig check;
    ShootConfig shoot;

    /// Every parameter that affects results, with effective values.
    std::vector<std::pair<std::string, std::string>> effective() const;
};

/// Throws ConfigErrors listing every problem found.
RunConfig validate_config(const ConfigFile& file, Task task, std::optional<std::uint64_t> seed_override = {});

/// q1..qn, u1..um, then parameters; `names` become aliases of q and u.
SymbolTable system_symbols(const SystemConfig& system);
DynamicsPtr build_dynamics(const SystemConfig& system);
/// Mechanical systems only.
MechanicalSpec build_mechanical(const SystemConfig& system);
PathControl build_path(const RunConfig& config);
/// Direct control u(t) of the [control] section; T is bound as a parameter.
PathPtr build_control_path(const RunConfig& config);
/// q(t) or u(t) of the [check] section.
PathPtr build_check_path(const RunConfig& config, bool q);
Dictionary build_config_dictionary(const RunConfig& config, const ReducedDynamics& dyn);

/// Lowercase hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);

enum ExitCode { kExitOk = 0, kExitValidation = 1, kExitNumerical = 2 };

/// Executes `task` and writes artifacts plus `manifest.txt` into out_dir.
/// Messages go to `log`; errors never escape.
int run(Task task, const std::string& config_path, const std::string& out_dir,
        std::optional<std::uint64_t> seed, std::ostream& log);

}  // namespace lagctl

#endif  // LAGCTL_CONFIG_HPP
