#include "xrla/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <istream>
#include <map>
#include <sstream>

namespace xrla::cli {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& text, char sep = ',')
{
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, sep)) {
        item = trim(item);
        if (!item.empty()) {
            out.push_back(item);
        }
    }
    return out;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* expected)
{
    throw ConfigError(key + ": expected " + expected + ", got '" + value + "'");
}

double to_double(const std::string& key, const std::string& v)
{
    std::size_t used = 0;
    double d = 0.0;
    try {
        d = std::stod(v, &used);
    } catch (const std::exception&) {
        bad_value(key, v, "a number");
    }
    if (used != v.size()) {
        bad_value(key, v, "a number");
    }
    return d;
}

std::uint64_t to_uint(const std::string& key, const std::string& v)
{
    if (v.empty() || !std::all_of(v.begin(), v.end(), [](unsigned char c) { return std::isdigit(c); })) {
        bad_value(key, v, "a non-negative integer");
    }
    try {
        return std::stoull(v);
    } catch (const std::exception&) {
        bad_value(key, v, "a non-negative integer");
    }
}

int to_int(const std::string& key, const std::string& v)
{
    std::size_t used = 0;
    long long x = 0;
    try {
        x = std::stoll(v, &used);
    } catch (const std::exception&) {
        bad_value(key, v, "an integer");
    }
    if (used != v.size() || x < -1000000 || x > 1000000) {
        bad_value(key, v, "an integer");
    }
    return static_cast<int>(x);
}

bool to_bool(const std::string& key, const std::string& v)
{
    if (v == "true" || v == "1" || v == "yes" || v == "on") {
        return true;
    }
    if (v == "false" || v == "0" || v == "no" || v == "off") {
        return false;
    }
    bad_value(key, v, "true or false");
}

std::string fmt(double d)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", d);
    return buf;
}

std::string fmt(bool b)
{
    return b ? "true" : "false";
}

template <typename T>
std::string join(const std::vector<T>& items, const std::function<std::string(const T&)>& f)
{
    std::string out;
    for (std::size_t k = 0; k < items.size(); ++k) {
        if (k > 0) {
            out += ", ";
        }
        out += f(items[k]);
    }
    return out;
}

link::MiCurve parse_curve(const std::string& key, const std::string& text)
{
    std::vector<double> db;
    std::vector<double> mi;
    for (const auto& pair : split_list(text)) {
        const auto colon = pair.find(':');
        if (colon == std::string::npos) {
            bad_value(key, text, "'sinr_db:mi' pairs");
        }
        db.push_back(to_double(key, trim(pair.substr(0, colon))));
        mi.push_back(to_double(key, trim(pair.substr(colon + 1))));
    }
    try {
        return link::MiCurve(std::move(db), std::move(mi));
    } catch (const std::exception& e) {
        throw ConfigError(key + ": " + e.what());
    }
}

std::string format_curve(const link::MiCurve& curve)
{
    std::string out;
    const auto db = curve.sinr_db_points();
    const auto mi = curve.mi_points();
    for (std::size_t k = 0; k < db.size(); ++k) {
        if (k > 0) {
            out += ", ";
        }
        out += fmt(db[k]) + ":" + fmt(mi[k]);
    }
    return out;
}

struct Entry {
    std::function<void(SimConfig&, const std::string&, const std::string&)> set;
    std::function<std::string(const SimConfig&)> get;
};

using Registry = std::map<std::string, Entry>;

template <typename Access>
void add_double(Registry& r, const std::string& key, Access access)
{
    r[key] = {[access](SimConfig& c, const std::string& k, const std::string& v) { access(c) = to_double(k, v); },
              [access](const SimConfig& c) { return fmt(access(const_cast<SimConfig&>(c))); }};
}

template <typename Access>
void add_uint(Registry& r, const std::string& key, Access access)
{
    r[key] = {[access](SimConfig& c, const std::string& k, const std::string& v) {
                  using T = std::remove_reference_t<decltype(access(c))>;
                  const auto x = to_uint(k, v);
                  if (x > std::numeric_limits<T>::max()) {
                      bad_value(k, v, "a smaller integer");
                  }
                  access(c) = static_cast<T>(x);
              },
              [access](const SimConfig& c) { return std::to_string(access(const_cast<SimConfig&>(c))); }};
}

template <typename Access>
void add_int(Registry& r, const std::string& key, Access access)
{
    r[key] = {[access](SimConfig& c, const std::string& k, const std::string& v) { access(c) = to_int(k, v); },
              [access](const SimConfig& c) { return std::to_string(access(const_cast<SimConfig&>(c))); }};
}

template <typename Access>
void add_bool(Registry& r, const std::string& key, Access access)
{
    r[key] = {[access](SimConfig& c, const std::string& k, const std::string& v) { access(c) = to_bool(k, v); },
              [access](const SimConfig& c) { return fmt(access(const_cast<SimConfig&>(c))); }};
}

template <typename Access>
void add_string(Registry& r, const std::string& key, Access access)
{
    r[key] = {[access](SimConfig& c, const std::string&, const std::string& v) { access(c) = v; },
              [access](const SimConfig& c) { return access(const_cast<SimConfig&>(c)); }};
}

void add_trunc_gaussian(Registry& r, const std::string& prefix,
                        std::function<sim::TruncGaussianParams&(SimConfig&)> access)
{
    add_double(r, prefix + "_mean", [access](SimConfig& c) -> double& { return access(c).mean; });
    add_double(r, prefix + "_std", [access](SimConfig& c) -> double& { return access(c).stddev; });
    add_double(r, prefix + "_min", [access](SimConfig& c) -> double& { return access(c).lower; });
    add_double(r, prefix + "_max", [access](SimConfig& c) -> double& { return access(c).upper; });
}

void add_olla(Registry& r, const std::string& prefix, std::function<sim::OllaParams&(SimConfig&)> access,
              bool with_target)
{
    if (with_target) {
        add_double(r, prefix + ".target", [access](SimConfig& c) -> double& { return access(c).target; });
    }
    add_double(r, prefix + ".step_up_db", [access](SimConfig& c) -> double& { return access(c).step_up_db; });
    add_double(r, prefix + ".initial_db", [access](SimConfig& c) -> double& { return access(c).initial_db; });
    add_double(r, prefix + ".min_db", [access](SimConfig& c) -> double& { return access(c).min_db; });
    add_double(r, prefix + ".max_db", [access](SimConfig& c) -> double& { return access(c).max_db; });
}

Registry build_registry()
{
    Registry r;
    add_double(r, "sim.horizon_s", [](SimConfig& c) -> double& { return c.sim.horizon_s; });
    add_uint(r, "sim.seed", [](SimConfig& c) -> std::uint64_t& { return c.sim.seed; });
    r["la.scheme"] = {[](SimConfig& c, const std::string& k, const std::string& v) {
                          try {
                              c.sim.scheme = sim::parse_scheme(v);
                          } catch (const std::domain_error&) {
                              bad_value(k, v, "baseline_tb, baseline_cbg or ecqi_cbg");
                          }
                      },
                      [](const SimConfig& c) { return std::string(sim::to_string(c.sim.scheme)); }};

    add_uint(r, "topology.cells", [](SimConfig& c) -> std::size_t& { return c.sim.topology.cells; });
    add_double(r, "topology.isd_m", [](SimConfig& c) -> double& { return c.sim.topology.isd_m; });
    add_uint(r, "topology.ues_per_cell", [](SimConfig& c) -> std::size_t& { return c.sim.topology.ues_per_cell; });
    add_double(r, "topology.hall_depth_m", [](SimConfig& c) -> double& { return c.sim.topology.hall_depth_m; });

    add_string(r, "frame.pattern", [](SimConfig& c) -> std::string& { return c.sim.frame.pattern; });
    add_double(r, "frame.slot_ms", [](SimConfig& c) -> double& { return c.sim.frame.slot_ms; });
    add_int(r, "frame.symbols_per_slot", [](SimConfig& c) -> int& { return c.sim.frame.symbols_per_slot; });
    add_int(r, "frame.control_symbols", [](SimConfig& c) -> int& { return c.sim.frame.control_symbols; });
    add_int(r, "frame.special_dl_symbols", [](SimConfig& c) -> int& { return c.sim.frame.special_dl_symbols; });
    add_int(r, "frame.ue_processing_symbols",
            [](SimConfig& c) -> int& { return c.sim.frame.ue_processing_symbols; });
    add_int(r, "frame.gnb_processing_symbols",
            [](SimConfig& c) -> int& { return c.sim.frame.gnb_processing_symbols; });

    add_string(r, "traffic.rate_label", [](SimConfig& c) -> std::string& { return c.rate_label; });
    add_double(r, "traffic.fps", [](SimConfig& c) -> double& { return c.sim.traffic.fps; });
    add_trunc_gaussian(r, "traffic.jitter_ms",
                       [](SimConfig& c) -> sim::TruncGaussianParams& { return c.sim.traffic.jitter_ms; });
    add_trunc_gaussian(r, "traffic.size_kb",
                       [](SimConfig& c) -> sim::TruncGaussianParams& { return c.sim.traffic.frame_kbytes; });
    add_double(r, "traffic.size_scale", [](SimConfig& c) -> double& { return c.sim.traffic.size_scale; });
    add_double(r, "traffic.pdb_ms", [](SimConfig& c) -> double& { return c.sim.traffic.pdb_ms; });
    add_bool(r, "traffic.full_buffer", [](SimConfig& c) -> bool& { return c.sim.traffic.full_buffer; });

    add_double(r, "channel.carrier_ghz", [](SimConfig& c) -> double& { return c.sim.channel.carrier_ghz; });
    add_double(r, "channel.tx_power_dbm", [](SimConfig& c) -> double& { return c.sim.channel.tx_power_dbm; });
    add_uint(r, "channel.prbs", [](SimConfig& c) -> std::size_t& { return c.sim.channel.prbs; });
    add_double(r, "channel.scs_khz", [](SimConfig& c) -> double& { return c.sim.channel.scs_khz; });
    add_double(r, "channel.noise_figure_db", [](SimConfig& c) -> double& { return c.sim.channel.noise_figure_db; });
    add_double(r, "channel.pathloss_exponent",
               [](SimConfig& c) -> double& { return c.sim.channel.pathloss_exponent; });
    add_double(r, "channel.shadowing_std_db",
               [](SimConfig& c) -> double& { return c.sim.channel.shadowing_std_db; });
    add_double(r, "channel.serving_bf_gain_db",
               [](SimConfig& c) -> double& { return c.sim.channel.serving_bf_gain_db; });
    add_double(r, "channel.interferer_bf_gain_db",
               [](SimConfig& c) -> double& { return c.sim.channel.interferer_bf_gain_db; });
    add_double(r, "channel.ue_speed_kmh", [](SimConfig& c) -> double& { return c.sim.channel.ue_speed_kmh; });
    add_uint(r, "channel.fading_group_prbs",
             [](SimConfig& c) -> std::size_t& { return c.sim.channel.fading_group_prbs; });
    add_bool(r, "channel.fading", [](SimConfig& c) -> bool& { return c.sim.channel.fading; });
    add_double(r, "channel.gnb_height_m", [](SimConfig& c) -> double& { return c.sim.channel.gnb_height_m; });
    add_double(r, "channel.ue_height_m", [](SimConfig& c) -> double& { return c.sim.channel.ue_height_m; });

    add_double(r, "link.bler_slope", [](SimConfig& c) -> double& { return c.sim.link.bler_slope; });
    add_double(r, "link.snr_gap_db", [](SimConfig& c) -> double& { return c.sim.link.snr_gap_db; });
    add_double(r, "link.eesm_beta", [](SimConfig& c) -> double& { return c.sim.link.eesm_beta; });
    r["link.midpoints_db"] = {[](SimConfig& c, const std::string& k, const std::string& v) {
                                  std::vector<double> mids;
                                  for (const auto& item : split_list(v)) {
                                      mids.push_back(to_double(k, item));
                                  }
                                  c.sim.link.midpoints_db = std::move(mids);
                              },
                              [](const SimConfig& c) {
                                  return join<double>(c.sim.link.midpoints_db,
                                                      [](const double& d) { return fmt(d); });
                              }};
    r["link.esm"] = {[](SimConfig& c, const std::string& k, const std::string& v) {
                         if (v != "eesm" && v != "mmib") {
                             bad_value(k, v, "eesm or mmib");
                         }
                         c.sim.link.use_mmib = v == "mmib";
                     },
                     [](const SimConfig& c) { return std::string(c.sim.link.use_mmib ? "mmib" : "eesm"); }};
    for (int qm : {2, 4, 6, 8}) {
        r["link.mmib.qm" + std::to_string(qm)] = {
            [qm](SimConfig& c, const std::string& k, const std::string& v) {
                if (trim(v).empty()) {
                    c.sim.link.mmib_curves.erase(qm);
                } else {
                    c.sim.link.mmib_curves.insert_or_assign(qm, parse_curve(k, v));
                }
            },
            [qm](const SimConfig& c) {
                const auto it = c.sim.link.mmib_curves.find(qm);
                return it == c.sim.link.mmib_curves.end() ? std::string() : format_curve(it->second);
            }};
    }

    add_double(r, "cqi.period_ms", [](SimConfig& c) -> double& { return c.sim.cqi.period_ms; });
    add_double(r, "cqi.delay_ms", [](SimConfig& c) -> double& { return c.sim.cqi.delay_ms; });
    add_double(r, "cqi.target_tbep", [](SimConfig& c) -> double& { return c.sim.cqi.target_tbep; });
    add_bool(r, "cqi.full_interference", [](SimConfig& c) -> bool& { return c.sim.cqi.full_interference; });

    add_uint(r, "ecqi.n", [](SimConfig& c) -> unsigned& { return c.sim.ecqi.n; });
    add_uint(r, "ecqi.m", [](SimConfig& c) -> unsigned& { return c.sim.ecqi.m; });
    add_double(r, "ecqi.p", [](SimConfig& c) -> double& { return c.sim.ecqi.p; });
    add_double(r, "ecqi.relaxed_delta", [](SimConfig& c) -> double& { return c.sim.ecqi.relaxed_delta; });
    add_bool(r, "ecqi.validate_monotone", [](SimConfig& c) -> bool& { return c.sim.ecqi.validate_monotone; });
    r["ecqi.mode"] = {[](SimConfig& c, const std::string& k, const std::string& v) {
                          try {
                              c.sim.ecqi.mode = cqi::parse_ecqi_mode(v);
                          } catch (const std::domain_error&) {
                              bad_value(k, v, "at_most_n or exactly_n");
                          }
                      },
                      [](const SimConfig& c) { return std::string(cqi::to_string(c.sim.ecqi.mode)); }};
    r["ecqi.search"] = {[](SimConfig& c, const std::string& k, const std::string& v) {
                            try {
                                c.sim.ecqi.search = cqi::parse_search_kind(v);
                            } catch (const std::domain_error&) {
                                bad_value(k, v, "linear_asc, linear_desc, binary or relaxed");
                            }
                        },
                        [](const SimConfig& c) { return std::string(cqi::to_string(c.sim.ecqi.search)); }};
    r["ecqi.eval"] = {[](SimConfig& c, const std::string& k, const std::string& v) {
                          try {
                              c.sim.ecqi.eval = cqi::parse_eval_method(v);
                          } catch (const std::domain_error&) {
                              bad_value(k, v, "closed, direct or dp");
                          }
                      },
                      [](const SimConfig& c) { return std::string(cqi::to_string(c.sim.ecqi.eval)); }};

    add_olla(r, "olla", [](SimConfig& c) -> sim::OllaParams& { return c.sim.olla; }, true);
    add_olla(r, "eolla", [](SimConfig& c) -> sim::OllaParams& { return c.sim.eolla; }, false);
    r["eolla.target"] = {[](SimConfig& c, const std::string& k, const std::string& v) {
                             if (v == "auto") {
                                 c.sim.eolla_target.reset();
                             } else {
                                 c.sim.eolla_target = to_double(k, v);
                             }
                         },
                         [](const SimConfig& c) {
                             return c.sim.eolla_target ? fmt(*c.sim.eolla_target) : std::string("auto");
                         }};

    r["harq.max_cbgs"] = {[](SimConfig& c, const std::string& k, const std::string& v) {
                              const auto f = to_uint(k, v);
                              if (f > 64) {
                                  bad_value(k, v, "2, 4, 6 or 8");
                              }
                              c.sim.max_cbgs = static_cast<unsigned>(f);
                              c.sim.ecqi.f = c.sim.max_cbgs;
                          },
                          [](const SimConfig& c) { return std::to_string(c.sim.max_cbgs); }};
    add_uint(r, "harq.max_attempts", [](SimConfig& c) -> unsigned& { return c.sim.harq_max_attempts; });
    add_double(r, "scheduler.pf_time_constant_ms",
               [](SimConfig& c) -> double& { return c.sim.pf_time_constant_ms; });

    r["campaign.loads"] = {[](SimConfig& c, const std::string& k, const std::string& v) {
                               std::vector<std::uint32_t> loads;
                               for (const auto& item : split_list(v)) {
                                   const auto x = to_uint(k, item);
                                   if (x == 0 || x > 1000) {
                                       bad_value(k, v, "loads between 1 and 1000");
                                   }
                                   loads.push_back(static_cast<std::uint32_t>(x));
                               }
                               c.campaign.loads = std::move(loads);
                           },
                           [](const SimConfig& c) {
                               return join<std::uint32_t>(c.campaign.loads,
                                                          [](const std::uint32_t& x) { return std::to_string(x); });
                           }};
    r["campaign.schemes"] = {[](SimConfig& c, const std::string& k, const std::string& v) {
                                 std::vector<sim::Scheme> schemes;
                                 for (const auto& item : split_list(v)) {
                                     try {
                                         schemes.push_back(sim::parse_scheme(item));
                                     } catch (const std::domain_error&) {
                                         bad_value(k, item, "baseline_tb, baseline_cbg or ecqi_cbg");
                                     }
                                 }
                                 c.campaign.schemes = std::move(schemes);
                             },
                             [](const SimConfig& c) {
                                 return join<sim::Scheme>(c.campaign.schemes, [](const sim::Scheme& s) {
                                     return std::string(sim::to_string(s));
                                 });
                             }};
    add_uint(r, "campaign.seeds", [](SimConfig& c) -> std::uint32_t& { return c.campaign.seeds; });
    add_uint(r, "campaign.parallelism", [](SimConfig& c) -> std::uint32_t& { return c.campaign.parallelism; });
    add_bool(r, "campaign.write_events", [](SimConfig& c) -> bool& { return c.campaign.write_events; });

    add_double(r, "kpi.x", [](SimConfig& c) -> double& { return c.kpi.x; });
    add_double(r, "kpi.y", [](SimConfig& c) -> double& { return c.kpi.y; });
    return r;
}

const Registry& registry()
{
    static const Registry r = build_registry();
    return r;
}

}  // namespace

SimConfig::SimConfig()
{
    // 45 Mbps frames scaled so that the baseline capacity of the single
    // antenna 20 MHz desk system falls inside the load sweep.
    sim.traffic.size_scale = 0.06;
    sim.eolla_target = 0.1;
    sim.channel.prbs = 51;
    sim.channel.tx_power_dbm = 24.0;
    sim.topology.ues_per_cell = campaign.loads.back();
}

void SimConfig::validate() const
{
    try {
        sim.validate();
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    if (campaign.loads.empty()) {
        throw ConfigError("campaign.loads must list at least one load");
    }
    if (campaign.schemes.empty()) {
        throw ConfigError("campaign.schemes must list at least one scheme");
    }
    if (campaign.seeds == 0) {
        throw ConfigError("campaign.seeds must be positive");
    }
    if (!(kpi.x > 0.0 && kpi.x <= 1.0) || !(kpi.y > 0.0 && kpi.y <= 1.0)) {
        throw ConfigError("kpi.x and kpi.y must lie in (0, 1]");
    }
    if (sim.link.use_mmib && sim.link.mmib_curves.empty()) {
        throw ConfigError("link.esm = mmib needs at least one link.mmib.qm* curve");
    }
}

void set_key(SimConfig& cfg, const std::string& key, const std::string& value)
{
    const auto& r = registry();
    const auto it = r.find(key);
    if (it == r.end()) {
        throw ConfigError("unknown key '" + key + "'");
    }
    it->second.set(cfg, key, value);
}

std::vector<std::pair<std::string, std::string>> dump(const SimConfig& cfg)
{
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& [key, entry] : registry()) {
        out.emplace_back(key, entry.get(cfg));
    }
    return out;
}

std::string dump_text(const SimConfig& cfg)
{
    std::string out;
    for (const auto& [k, v] : dump(cfg)) {
        out += k + " = " + v + "\n";
    }
    return out;
}

void apply_text(SimConfig& cfg, std::istream& in)
{
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(number) + ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError("line " + std::to_string(number) + ": missing key");
        }
        try {
            set_key(cfg, key, value);
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(number) + ": " + e.what());
        }
    }
}

SimConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file '" + path.string() + "'");
    }
    SimConfig cfg;
    apply_text(cfg, in);
    cfg.validate();
    return cfg;
}

void apply_overrides(SimConfig& cfg, const std::vector<std::string>& assignments)
{
    for (const auto& a : assignments) {
        const auto eq = a.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("override '" + a + "' is not of the form key=value");
        }
        set_key(cfg, trim(a.substr(0, eq)), trim(a.substr(eq + 1)));
    }
}

std::string config_hash(const SimConfig& cfg)
{
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : dump_text(cfg)) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace xrla::cli
