#include "cubemix/config.hpp"

#include <fstream>
#include <sstream>

namespace cubemix {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string item;
    while (std::getline(in, item, sep)) out.push_back(trim(item));
    return out;
}

int to_int(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        int n = std::stoi(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return n;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "' needs an integer, got '" + v + "'");
    }
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "' needs a number, got '" + v + "'");
    }
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        unsigned long long n = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return static_cast<std::uint64_t>(n);
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "' needs a non-negative integer, got '" + v + "'");
    }
}

PathSize to_path_size(const std::string& key, const std::string& v) {
    std::size_t x = v.find('x');
    if (x == std::string::npos)
        throw ConfigError("key '" + key + "' needs WxH entries, got '" + v + "'");
    return {to_int(key, v.substr(0, x)), to_int(key, v.substr(x + 1))};
}

} // namespace

void RunConfig::validate() const {
    net.validate();
    train.validate();
    if (data_patch < 16) throw ConfigError("data.patch must be at least 16");
    if (data_count < 1) throw ConfigError("data.count must be >= 1");
    if (data_holdout < 0) throw ConfigError("data.holdout must be >= 0");
    if (data_mode == DataMode::dir && data_dir.empty())
        throw ConfigError("data.mode=dir requires data.dir");
    if (ablate_variants.empty()) throw ConfigError("ablate.variants must not be empty");
    // a path plane below 4x4 is rejected up front, before any compute
    net.resolve_path_sizes(data_patch, data_patch);
}

RunConfig parse_config_text(const std::string& text) {
    RunConfig cfg;
    bool scales_set = false, sizes_set = false;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = raw;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value, got '" +
                              raw + "'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("line " + std::to_string(line_no) + ": empty key or value");

        if (key == "seed") {
            cfg.seed = to_u64(key, value);
        } else if (key == "network.scales") {
            cfg.net.path_scales.clear();
            for (const std::string& s : split(value, ',')) cfg.net.path_scales.push_back(to_double(key, s));
            scales_set = true;
        } else if (key == "network.path_sizes") {
            cfg.net.path_sizes.clear();
            for (const std::string& s : split(value, ',')) cfg.net.path_sizes.push_back(to_path_size(key, s));
            sizes_set = true;
        } else if (key == "network.blocks_per_path") {
            cfg.net.blocks_per_path = to_int(key, value);
        } else if (key == "network.channels") {
            cfg.net.channels = to_int(key, value);
        } else if (key == "network.hidden_ratio") {
            cfg.net.hidden_ratio = to_double(key, value);
        } else if (key == "network.lfe_kernel") {
            cfg.net.lfe_kernel = to_int(key, value);
        } else if (key == "network.slicing") {
            cfg.net.slicing_mode = slicing_from_string(value);
        } else if (key == "train.lr") {
            cfg.train.lr = to_double(key, value);
        } else if (key == "train.batch_size") {
            cfg.train.batch_size = to_int(key, value);
        } else if (key == "train.iterations") {
            cfg.train.iterations = to_int(key, value);
        } else if (key == "train.lambda_p") {
            cfg.train.lambda_p = to_double(key, value);
        } else if (key == "train.ablation") {
            cfg.train.ablation = ablation_from_string(value);
        } else if (key == "train.eval_every") {
            cfg.train.eval_every = to_int(key, value);
        } else if (key == "data.mode") {
            if (value == "synthetic")
                cfg.data_mode = DataMode::synthetic;
            else if (value == "dir")
                cfg.data_mode = DataMode::dir;
            else
                throw ConfigError("data.mode must be 'synthetic' or 'dir', got '" + value + "'");
        } else if (key == "data.dir") {
            cfg.data_dir = value;
        } else if (key == "data.count") {
            cfg.data_count = to_int(key, value);
        } else if (key == "data.holdout") {
            cfg.data_holdout = to_int(key, value);
        } else if (key == "data.patch") {
            cfg.data_patch = to_int(key, value);
        } else if (key == "io.checkpoint") {
            cfg.io_checkpoint = value;
        } else if (key == "io.metrics") {
            cfg.io_metrics = value;
        } else if (key == "io.eval") {
            cfg.io_eval = value;
        } else if (key == "io.ablate") {
            cfg.io_ablate = value;
        } else if (key == "ablate.variants") {
            cfg.ablate_variants.clear();
            for (const std::string& s : split(value, ',')) cfg.ablate_variants.push_back(ablation_from_string(s));
        } else {
            throw ConfigError("unknown config key '" + key + "' on line " + std::to_string(line_no));
        }
    }
    if (sizes_set && scales_set)
        throw ConfigError("network.scales and network.path_sizes are mutually exclusive");
    if (sizes_set) cfg.net.path_scales.clear();
    cfg.train.seed = cfg.seed;
    cfg.validate();
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

} // namespace cubemix
