#include "config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

extern char** environ;

namespace cneigh::cli {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line, char sep)
{
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, sep))
        out.push_back(trim(cell));
    if (!line.empty() && line.back() == sep)
        out.emplace_back();
    return out;
}

std::optional<double> to_double(const std::string& s)
{
    if (s.empty())
        return std::nullopt;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size())
        return std::nullopt;
    return v;
}

} // namespace

CsvTable read_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open '" + path + "'");
    CsvTable table;
    std::string line;
    int lineno = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#')
            continue;
        const auto cells = split(t, ',');
        std::vector<double> row;
        bool numeric = true;
        for (const auto& c : cells) {
            const auto v = to_double(c);
            if (!v) {
                numeric = false;
                break;
            }
            row.push_back(*v);
        }
        if (!numeric) {
            if (first) {
                table.header = cells;
                first = false;
                continue;
            }
            throw Error(path + ":" + std::to_string(lineno) + ": malformed number in '" + t + "'");
        }
        first = false;
        const std::size_t width = table.header.empty() ? (table.rows.empty() ? row.size() : table.rows.front().size())
                                                       : table.header.size();
        if (row.size() != width)
            throw Error(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(width) + " columns, found "
                        + std::to_string(row.size()));
        for (double v : row)
            if (!std::isfinite(v))
                throw Error(path + ":" + std::to_string(lineno) + ": non-finite value");
        table.rows.push_back(std::move(row));
        table.lines.push_back(lineno);
    }
    if (in.bad())
        throw IoError("error reading '" + path + "'");
    if (table.rows.empty())
        throw Error(path + ": no data rows");
    return table;
}

std::size_t column_index(const CsvTable& table, const std::string& name_or_pos)
{
    const auto it = std::find(table.header.begin(), table.header.end(), name_or_pos);
    if (it != table.header.end())
        return static_cast<std::size_t>(it - table.header.begin());
    const auto pos = to_double(name_or_pos);
    const std::size_t width = table.rows.front().size();
    if (pos && *pos >= 1 && *pos <= static_cast<double>(width) && *pos == std::floor(*pos))
        return static_cast<std::size_t>(*pos) - 1;
    throw Error("no column '" + name_or_pos + "'");
}

Environment cneigh_environment()
{
    Environment env;
    for (char** e = environ; e && *e; ++e) {
        const std::string kv = *e;
        if (kv.rfind("CNEIGH_", 0) != 0)
            continue;
        const auto eq = kv.find('=');
        if (eq != std::string::npos)
            env[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    return env;
}

const std::vector<std::string>& run_keys()
{
    static const std::vector<std::string> k{"reps", "seed", "jobs", "out", "timing", "full_scale"};
    return k;
}

const std::vector<std::string>& scenario_keys()
{
    static const std::vector<std::string> k{"id", "kind", "M", "nu", "b", "sigma", "p", "K", "gamma", "K2d",
                                            "score", "methods", "B", "level", "mstar", "beta"};
    return k;
}

namespace {

using boost::property_tree::ptree;

std::string env_name(const std::string& section, const std::string& key)
{
    std::string s = "CNEIGH_" + section + "_" + key;
    for (auto& c : s)
        c = std::isalnum(static_cast<unsigned char>(c)) ? static_cast<char>(std::toupper(static_cast<unsigned char>(c)))
                                                        : '_';
    return s;
}

class Section {
public:
    Section(std::string name, const ptree& tree, const std::vector<std::string>& allowed, const Environment& env,
            std::set<std::string>& used)
        : name_(std::move(name))
    {
        for (const auto& [k, v] : tree) {
            if (!v.empty())
                throw Error("[" + name_ + "]: nested entries are not allowed");
            if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
                throw Error("[" + name_ + "]: unknown key '" + k + "'");
            values_[k] = trim(v.data());
        }
        for (const auto& k : allowed) {
            const auto it = env.find(env_name(name_, k));
            if (it != env.end()) {
                values_[k] = trim(it->second);
                used.insert(it->first);
            }
        }
    }

    bool has(const std::string& k) const { return values_.count(k) > 0; }

    std::string str(const std::string& k) const { return values_.at(k); }

    double real(const std::string& k) const
    {
        const auto v = to_double(values_.at(k));
        if (!v)
            throw Error("[" + name_ + "] " + k + ": expected a number, got '" + values_.at(k) + "'");
        return *v;
    }

    long long integer(const std::string& k) const
    {
        const double v = real(k);
        if (v != std::floor(v))
            throw Error("[" + name_ + "] " + k + ": expected an integer, got '" + values_.at(k) + "'");
        return static_cast<long long>(v);
    }

    bool boolean(const std::string& k) const
    {
        const std::string v = values_.at(k);
        if (v == "true" || v == "1" || v == "yes")
            return true;
        if (v == "false" || v == "0" || v == "no")
            return false;
        throw Error("[" + name_ + "] " + k + ": expected true or false, got '" + v + "'");
    }

private:
    std::string name_;
    std::map<std::string, std::string> values_;
};

Scenario parse_scenario(const Section& s, const std::string& default_id)
{
    Scenario sc;
    sc.id = s.has("id") ? s.str("id") : default_id;
    if (s.has("kind")) {
        const auto k = s.str("kind");
        if (k == "regression1d")
            sc.kind = ScenarioKind::Regression1d;
        else if (k == "scores2d")
            sc.kind = ScenarioKind::Scores2d;
        else
            throw Error("scenario " + sc.id + ": kind must be regression1d or scores2d");
    }
    if (s.has("M"))
        sc.M = s.integer("M");
    if (s.has("nu"))
        sc.nu = s.real("nu");
    if (s.has("b"))
        sc.b = s.real("b");
    if (s.has("sigma"))
        sc.sigma = s.real("sigma");
    if (s.has("p"))
        sc.p = s.real("p");
    if (s.has("K"))
        sc.K = static_cast<int>(s.integer("K"));
    if (s.has("gamma"))
        sc.gamma = s.real("gamma");
    if (s.has("K2d"))
        sc.K2d = static_cast<int>(s.integer("K2d"));
    if (s.has("score"))
        sc.score = static_cast<int>(s.integer("score"));
    if (s.has("methods")) {
        sc.methods.clear();
        for (const auto& m : split(s.str("methods"), ','))
            if (!m.empty())
                sc.methods.push_back(m);
    }
    if (s.has("B"))
        sc.B = static_cast<int>(s.integer("B"));
    if (s.has("level"))
        sc.level = s.real("level");
    if (s.has("mstar"))
        sc.mstar = s.integer("mstar");
    if (s.has("beta"))
        sc.beta = s.real("beta");
    return sc;
}

} // namespace

BenchConfig load_bench_config(const std::string& path, const Environment& env)
{
    ptree tree;
    {
        std::ifstream in(path);
        if (!in)
            throw IoError("cannot open config '" + path + "'");
        try {
            boost::property_tree::read_ini(in, tree);
        } catch (const boost::property_tree::ini_parser_error& e) {
            throw Error(path + ":" + std::to_string(e.line()) + ": " + e.message());
        }
    }

    BenchConfig cfg;
    std::set<std::string> used;
    bool have_run = false;
    for (const auto& [name, sub] : tree) {
        if (sub.empty() && !sub.data().empty())
            throw Error(path + ": key '" + name + "' outside any section");
        if (name == "run") {
            have_run = true;
            const Section s(name, sub, run_keys(), env, used);
            if (s.has("reps"))
                cfg.reps = static_cast<int>(s.integer("reps"));
            if (s.has("seed"))
                cfg.seed = static_cast<std::uint64_t>(s.integer("seed"));
            if (s.has("jobs"))
                cfg.jobs = static_cast<int>(s.integer("jobs"));
            if (s.has("out"))
                cfg.out = s.str("out");
            if (s.has("timing"))
                cfg.timing = s.boolean("timing");
            if (s.has("full_scale"))
                cfg.full_scale = s.boolean("full_scale");
        } else if (name == "scenario" || name.rfind("scenario.", 0) == 0) {
            const Section s(name, sub, scenario_keys(), env, used);
            cfg.scenarios.push_back(parse_scenario(s, name == "scenario" ? "scenario" : name.substr(9)));
        } else {
            throw Error(path + ": unknown section [" + name + "]");
        }
    }
    if (!have_run) {
        const Section s("run", ptree{}, run_keys(), env, used);
        if (s.has("reps"))
            cfg.reps = static_cast<int>(s.integer("reps"));
        if (s.has("seed"))
            cfg.seed = static_cast<std::uint64_t>(s.integer("seed"));
        if (s.has("jobs"))
            cfg.jobs = static_cast<int>(s.integer("jobs"));
        if (s.has("out"))
            cfg.out = s.str("out");
    }
    for (const auto& [k, v] : env)
        if (!used.count(k))
            throw Error("unknown override variable " + k);
    if (cfg.scenarios.empty())
        throw Error(path + ": no [scenario] section");
    if (cfg.reps < 0)
        throw Error("reps must be >= 0");
    return cfg;
}

} // namespace cneigh::cli
