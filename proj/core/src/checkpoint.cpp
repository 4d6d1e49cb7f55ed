#include "cubemix/checkpoint.hpp"

#include <array>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace cubemix {

std::uint32_t crc32(const unsigned char* data, std::size_t n) {
    static const std::array<std::uint32_t, 256> table = [] {
        std::array<std::uint32_t, 256> t{};
        for (std::uint32_t i = 0; i < 256; ++i) {
            std::uint32_t c = i;
            for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xedb88320u ^ (c >> 1) : c >> 1;
            t[i] = c;
        }
        return t;
    }();
    std::uint32_t crc = 0xffffffffu;
    for (std::size_t i = 0; i < n; ++i) crc = table[(crc ^ data[i]) & 0xffu] ^ (crc >> 8);
    return crc ^ 0xffffffffu;
}

std::string config_echo(const NetworkParams& params) {
    char ratio[64];
    std::snprintf(ratio, sizeof(ratio), "%.17g", params.config.hidden_ratio);
    std::ostringstream os;
    os << "ablation=" << to_string(params.ablation) << "\n";
    os << "blocks_per_path=" << params.config.blocks_per_path << "\n";
    os << "channels=" << params.config.channels << "\n";
    os << "hidden_ratio=" << ratio << "\n";
    os << "lfe_kernel=" << params.config.lfe_kernel << "\n";
    os << "path_sizes=";
    for (std::size_t i = 0; i < params.config.path_sizes.size(); ++i) {
        if (i) os << ",";
        os << params.config.path_sizes[i].w << "x" << params.config.path_sizes[i].h;
    }
    os << "\n";
    os << "slicing=" << to_string(params.config.slicing_mode) << "\n";
    return os.str();
}

namespace {

void put_u32(std::vector<unsigned char>& buf, std::uint32_t v) {
    buf.push_back(static_cast<unsigned char>(v & 0xff));
    buf.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
    buf.push_back(static_cast<unsigned char>((v >> 16) & 0xff));
    buf.push_back(static_cast<unsigned char>((v >> 24) & 0xff));
}

void put_f32(std::vector<unsigned char>& buf, float f) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    put_u32(buf, bits);
}

struct Reader {
    const std::vector<unsigned char>& buf;
    std::size_t pos = 0;
    const std::string& path;

    std::uint32_t u32() {
        if (pos + 4 > buf.size()) throw IoError(path + ": truncated checkpoint");
        std::uint32_t v = static_cast<std::uint32_t>(buf[pos]) |
                          (static_cast<std::uint32_t>(buf[pos + 1]) << 8) |
                          (static_cast<std::uint32_t>(buf[pos + 2]) << 16) |
                          (static_cast<std::uint32_t>(buf[pos + 3]) << 24);
        pos += 4;
        return v;
    }
    float f32() {
        std::uint32_t bits = u32();
        float f;
        std::memcpy(&f, &bits, 4);
        return f;
    }
    std::string str(std::size_t n) {
        if (pos + n > buf.size()) throw IoError(path + ": truncated checkpoint");
        std::string s(reinterpret_cast<const char*>(buf.data() + pos), n);
        pos += n;
        return s;
    }
};

NetworkConfig config_from_echo(const std::string& echo, Ablation& ablation,
                               const std::string& path) {
    NetworkConfig cfg;
    cfg.path_scales.clear();
    std::istringstream in(echo);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos) throw IoError(path + ": malformed config echo line '" + line + "'");
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        if (key == "ablation") {
            ablation = ablation_from_string(value);
        } else if (key == "blocks_per_path") {
            cfg.blocks_per_path = std::stoi(value);
        } else if (key == "channels") {
            cfg.channels = std::stoi(value);
        } else if (key == "hidden_ratio") {
            cfg.hidden_ratio = std::stod(value);
        } else if (key == "lfe_kernel") {
            cfg.lfe_kernel = std::stoi(value);
        } else if (key == "path_sizes") {
            std::istringstream vs(value);
            std::string item;
            while (std::getline(vs, item, ',')) {
                std::size_t x = item.find('x');
                if (x == std::string::npos) throw IoError(path + ": malformed path size '" + item + "'");
                cfg.path_sizes.push_back(
                    {std::stoi(item.substr(0, x)), std::stoi(item.substr(x + 1))});
            }
        } else if (key == "slicing") {
            cfg.slicing_mode = slicing_from_string(value);
        } else {
            throw IoError(path + ": unknown config echo key '" + key + "'");
        }
    }
    if (cfg.path_sizes.empty()) throw IoError(path + ": config echo has no path sizes");
    return cfg;
}

} // namespace

void checkpoint_save(const std::string& path, const NetworkParams& params) {
    std::vector<unsigned char> buf;
    buf.push_back('C');
    buf.push_back('B');
    buf.push_back('M');
    buf.push_back('X');
    put_u32(buf, 1); // version
    std::string echo = config_echo(params);
    put_u32(buf, static_cast<std::uint32_t>(echo.size()));
    buf.insert(buf.end(), echo.begin(), echo.end());
    put_u32(buf, static_cast<std::uint32_t>(params.table.count()));
    for (int i = 0; i < params.table.count(); ++i) {
        const std::string& name = params.table.name(i);
        const Tensor& t = params.table.value(i);
        put_u32(buf, static_cast<std::uint32_t>(name.size()));
        buf.insert(buf.end(), name.begin(), name.end());
        put_u32(buf, static_cast<std::uint32_t>(t.rank()));
        for (int d = 0; d < t.rank(); ++d) put_u32(buf, static_cast<std::uint32_t>(t.dim(d)));
        for (std::size_t j = 0; j < t.numel(); ++j) put_f32(buf, static_cast<float>(t[j]));
    }
    put_u32(buf, crc32(buf.data(), buf.size()));

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path + ": cannot open for writing");
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!out) throw IoError(path + ": write failed");
}

NetworkParams checkpoint_load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path + ": cannot open for reading");
    std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
    if (buf.size() < 12) throw IoError(path + ": truncated checkpoint");
    std::uint32_t stored_crc = static_cast<std::uint32_t>(buf[buf.size() - 4]) |
                               (static_cast<std::uint32_t>(buf[buf.size() - 3]) << 8) |
                               (static_cast<std::uint32_t>(buf[buf.size() - 2]) << 16) |
                               (static_cast<std::uint32_t>(buf[buf.size() - 1]) << 24);
    if (crc32(buf.data(), buf.size() - 4) != stored_crc)
        throw IoError(path + ": checksum mismatch, checkpoint is corrupt");

    Reader r{buf, 0, path};
    if (r.str(4) != "CBMX") throw IoError(path + ": bad checkpoint magic");
    std::uint32_t version = r.u32();
    if (version != 1) throw IoError(path + ": unsupported checkpoint version " + std::to_string(version));
    std::string echo = r.str(r.u32());
    Ablation ablation = Ablation::full;
    NetworkConfig cfg = config_from_echo(echo, ablation, path);

    // rebuild the parameter skeleton, then overwrite values from the blobs
    NetworkParams params = init_network(cfg, ablation, cfg.path_sizes[0].w * 4,
                                        cfg.path_sizes[0].h * 4, /*seed=*/0);
    std::uint32_t entries = r.u32();
    if (static_cast<int>(entries) != params.table.count())
        throw IoError(path + ": checkpoint has " + std::to_string(entries) +
                      " parameters, config echo implies " + std::to_string(params.table.count()));
    for (std::uint32_t i = 0; i < entries; ++i) {
        std::string name = r.str(r.u32());
        if (name != params.table.name(static_cast<int>(i)))
            throw IoError(path + ": parameter " + std::to_string(i) + " is '" + name +
                          "', expected '" + params.table.name(static_cast<int>(i)) + "'");
        std::uint32_t rank = r.u32();
        Tensor& t = params.table.value(static_cast<int>(i));
        if (static_cast<int>(rank) != t.rank())
            throw IoError(path + ": parameter '" + name + "' rank mismatch");
        for (std::uint32_t d = 0; d < rank; ++d) {
            if (static_cast<int>(r.u32()) != t.dim(static_cast<int>(d)))
                throw IoError(path + ": parameter '" + name + "' shape mismatch");
        }
        for (std::size_t j = 0; j < t.numel(); ++j) t[j] = static_cast<double>(r.f32());
    }
    if (r.pos != buf.size() - 4) throw IoError(path + ": trailing bytes in checkpoint");
    return params;
}

} // namespace cubemix
