#include "ddos/traffic.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>

#include "ddos/errors.hpp"

namespace ddos {

namespace {

constexpr std::string_view kPacketHeader = "timestamp,src_ip,dst_ip,protocol,length,syn";
constexpr std::string_view kLabelHeader = "window_index,label";

// Legitimate clients are 192.168.0.0/24, servers 10.0.0.1-16 (10.0.0.1 is the
// attack victim), spoofed attack sources count up from 11.0.0.0.
constexpr std::uint32_t kClientBase = 0xC0A80000u;
constexpr std::uint32_t kClientPool = 256;
constexpr std::uint32_t kServerBase = 0x0A000001u;
constexpr std::uint32_t kServerPool = 16;
constexpr std::uint32_t kSpoofBase = 0x0B000000u;

constexpr double kTcpShare = 0.80;
constexpr double kUdpShare = 0.15;
constexpr double kSynShareOfTcp = 0.05;

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

std::string_view strip_cr(std::string_view s) {
    if (!s.empty() && s.back() == '\r') {
        s.remove_suffix(1);
    }
    return s;
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, out);
    return ec == std::errc() && ptr == end && !text.empty();
}

std::string line_error(std::size_t line, std::string_view msg) {
    return "line " + std::to_string(line) + ": " + std::string(msg);
}

std::string format_double(double x) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, ptr);
}

std::string_view attack_kind_name(AttackKind k) {
    switch (k) {
        case AttackKind::SynFlood:
            return "SynFlood";
        case AttackKind::UdpFlood:
            return "UdpFlood";
        case AttackKind::IcmpFlood:
            return "IcmpFlood";
    }
    return "SynFlood";
}

AttackKind parse_attack_kind(std::string_view s) {
    if (s == "SynFlood") return AttackKind::SynFlood;
    if (s == "UdpFlood") return AttackKind::UdpFlood;
    if (s == "IcmpFlood") return AttackKind::IcmpFlood;
    throw InputError("unknown attack kind '" + std::string(s) + "'");
}

PacketRecord legitimate_packet(double t, Rng& rng) {
    PacketRecord p;
    p.timestamp = t;
    p.src_ip = kClientBase + static_cast<std::uint32_t>(rng.index(kClientPool));
    p.dst_ip = kServerBase + static_cast<std::uint32_t>(rng.index(kServerPool));
    const double u = rng.uniform();
    p.protocol = u < kTcpShare ? Protocol::Tcp : (u < kTcpShare + kUdpShare ? Protocol::Udp : Protocol::Icmp);
    p.length = 64 + static_cast<std::uint32_t>(rng.index(1500 - 64 + 1));
    p.syn = p.protocol == Protocol::Tcp && rng.uniform() < kSynShareOfTcp;
    return p;
}

PacketRecord attack_packet(double t, const AttackSpec& attack, Rng& rng) {
    PacketRecord p;
    p.timestamp = t;
    p.src_ip = kSpoofBase + static_cast<std::uint32_t>(rng.index(attack.source_pool));
    p.dst_ip = kServerBase;
    switch (attack.kind) {
        case AttackKind::SynFlood:
            p.protocol = Protocol::Tcp;
            p.syn = true;
            p.length = 64;
            break;
        case AttackKind::UdpFlood:
            p.protocol = Protocol::Udp;
            p.length = 512;
            break;
        case AttackKind::IcmpFlood:
            p.protocol = Protocol::Icmp;
            p.length = 64;
            break;
    }
    return p;
}

}  // namespace

std::string_view protocol_name(Protocol p) {
    switch (p) {
        case Protocol::Tcp:
            return "TCP";
        case Protocol::Udp:
            return "UDP";
        case Protocol::Icmp:
            return "ICMP";
    }
    return "TCP";
}

std::string format_ipv4(std::uint32_t addr) {
    return std::to_string(addr >> 24) + "." + std::to_string((addr >> 16) & 0xFF) + "." +
           std::to_string((addr >> 8) & 0xFF) + "." + std::to_string(addr & 0xFF);
}

std::uint32_t parse_ipv4(std::string_view text) {
    const auto parts = split(text, '.');
    if (parts.size() != 4) {
        throw InputError("malformed IPv4 address '" + std::string(text) + "'");
    }
    std::uint32_t addr = 0;
    for (const auto part : parts) {
        unsigned octet = 0;
        if (!parse_number(part, octet) || octet > 255) {
            throw InputError("malformed IPv4 address '" + std::string(text) + "'");
        }
        addr = (addr << 8) | octet;
    }
    return addr;
}

std::vector<PacketRecord> parse_packets(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || strip_cr(line) != kPacketHeader) {
        throw InputError(line_error(1, "expected header '" + std::string(kPacketHeader) + "'"));
    }
    std::vector<PacketRecord> records;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view row = strip_cr(line);
        if (row.empty()) {
            continue;
        }
        const auto f = split(row, ',');
        if (f.size() != 6) {
            throw InputError(line_error(line_no, "expected 6 fields"));
        }
        PacketRecord p;
        if (!parse_number(f[0], p.timestamp) || !std::isfinite(p.timestamp) || p.timestamp < 0.0) {
            throw InputError(line_error(line_no, "bad timestamp '" + std::string(f[0]) + "'"));
        }
        try {
            p.src_ip = parse_ipv4(f[1]);
            p.dst_ip = parse_ipv4(f[2]);
        } catch (const InputError& e) {
            throw InputError(line_error(line_no, e.what()));
        }
        if (f[3] == "TCP") {
            p.protocol = Protocol::Tcp;
        } else if (f[3] == "UDP") {
            p.protocol = Protocol::Udp;
        } else if (f[3] == "ICMP") {
            p.protocol = Protocol::Icmp;
        } else {
            throw InputError(line_error(line_no, "unknown protocol '" + std::string(f[3]) + "'"));
        }
        if (!parse_number(f[4], p.length) || p.length == 0) {
            throw InputError(line_error(line_no, "bad length '" + std::string(f[4]) + "'"));
        }
        if (f[5] == "1") {
            p.syn = true;
        } else if (f[5] != "0") {
            throw InputError(line_error(line_no, "syn must be 0 or 1"));
        }
        records.push_back(p);
    }
    return records;
}

void write_packets(std::ostream& out, std::span<const PacketRecord> records) {
    out << kPacketHeader << '\n';
    for (const auto& p : records) {
        out << format_double(p.timestamp) << ',' << format_ipv4(p.src_ip) << ',' << format_ipv4(p.dst_ip) << ','
            << protocol_name(p.protocol) << ',' << p.length << ',' << (p.syn ? 1 : 0) << '\n';
    }
}

void Scenario::validate() const {
    if (!(duration > 0.0) || !std::isfinite(duration)) {
        throw InputError("scenario duration must be positive");
    }
    if (!(baseline_rate > 0.0) || !std::isfinite(baseline_rate)) {
        throw InputError("scenario baseline_rate must be positive");
    }
    if (!(diurnal_amplitude >= 0.0 && diurnal_amplitude <= 1.0)) {
        throw InputError("scenario diurnal_amplitude must lie in [0, 1]");
    }
    for (const auto& a : attacks) {
        if (!(a.start >= 0.0 && a.start < a.end && a.end <= duration)) {
            throw InputError("attack interval must satisfy 0 <= start < end <= duration");
        }
        if (!(a.multiplier >= 1.0) || !std::isfinite(a.multiplier)) {
            throw InputError("attack multiplier must be at least 1");
        }
        if (a.source_pool == 0) {
            throw InputError("attack source_pool must be at least 1");
        }
    }
}

Scenario scenario_from_json(const nlohmann::json& j) {
    Scenario s;
    try {
        if (!j.is_object()) {
            throw InputError("bad scenario: expected a JSON object");
        }
        s.duration = j.value("duration", s.duration);
        s.baseline_rate = j.value("baseline_rate", s.baseline_rate);
        s.diurnal_amplitude = j.value("diurnal_amplitude", s.diurnal_amplitude);
        for (const auto& a : j.value("attacks", nlohmann::json::array())) {
            AttackSpec spec;
            spec.start = a.at("start").get<double>();
            spec.end = a.at("end").get<double>();
            spec.kind = parse_attack_kind(a.at("kind").get<std::string>());
            spec.multiplier = a.at("multiplier").get<double>();
            spec.source_pool = a.at("source_pool").get<std::uint32_t>();
            s.attacks.push_back(spec);
        }
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("bad scenario: ") + e.what());
    }
    s.validate();
    return s;
}

nlohmann::json scenario_to_json(const Scenario& s) {
    nlohmann::json attacks = nlohmann::json::array();
    for (const auto& a : s.attacks) {
        attacks.push_back({{"start", a.start},
                           {"end", a.end},
                           {"kind", attack_kind_name(a.kind)},
                           {"multiplier", a.multiplier},
                           {"source_pool", a.source_pool}});
    }
    return {{"duration", s.duration},
            {"baseline_rate", s.baseline_rate},
            {"diurnal_amplitude", s.diurnal_amplitude},
            {"attacks", attacks}};
}

Scenario preset_scenario(std::string_view name) {
    Scenario s;
    s.baseline_rate = 100.0;
    s.diurnal_amplitude = 0.1;
    if (name == "quiet") {
        s.duration = 600.0;
    } else if (name == "syn10") {
        s.duration = 300.0;
        s.attacks.push_back({120.0, 150.0, AttackKind::SynFlood, 10.0, 1000});
    } else if (name == "mixed") {
        s.duration = 300.0;
        s.attacks.push_back({60.0, 90.0, AttackKind::SynFlood, 10.0, 1000});
        s.attacks.push_back({150.0, 180.0, AttackKind::UdpFlood, 5.0, 500});
        s.attacks.push_back({240.0, 260.0, AttackKind::IcmpFlood, 5.0, 500});
    } else {
        throw InputError("unknown scenario preset '" + std::string(name) + "'");
    }
    return s;
}

std::size_t window_count(double duration, double window_len) {
    if (!(window_len > 0.0)) {
        throw InputError("window length must be positive");
    }
    return static_cast<std::size_t>(std::ceil(duration / window_len));
}

GeneratedTraffic generate_traffic(const Scenario& scenario, Rng& rng, double window_len) {
    scenario.validate();
    GeneratedTraffic out;

    // Thinning against the peak rate.
    const double peak = scenario.baseline_rate * (1.0 + scenario.diurnal_amplitude);
    for (double t = rng.exponential(peak); t < scenario.duration; t += rng.exponential(peak)) {
        const double rate = scenario.baseline_rate *
                            (1.0 + scenario.diurnal_amplitude * std::sin(2.0 * std::numbers::pi * t / scenario.duration));
        if (rng.uniform() * peak < rate) {
            out.records.push_back(legitimate_packet(t, rng));
        }
    }
    for (const auto& attack : scenario.attacks) {
        const double rate = attack.multiplier * scenario.baseline_rate;
        for (double t = attack.start + rng.exponential(rate); t < attack.end; t += rng.exponential(rate)) {
            out.records.push_back(attack_packet(t, attack, rng));
        }
    }
    std::stable_sort(out.records.begin(), out.records.end(),
                     [](const PacketRecord& x, const PacketRecord& y) { return x.timestamp < y.timestamp; });

    const std::size_t windows = window_count(scenario.duration, window_len);
    out.labels.assign(windows, false);
    for (std::size_t w = 0; w < windows; ++w) {
        const double lo = static_cast<double>(w) * window_len;
        const double hi = lo + window_len;
        for (const auto& a : scenario.attacks) {
            if (lo < a.end && hi > a.start) {
                out.labels[w] = true;
            }
        }
    }
    return out;
}

std::vector<Window> windowize(std::vector<PacketRecord> records, double window_len) {
    if (!(window_len > 0.0)) {
        throw InputError("window length must be positive");
    }
    std::vector<Window> windows;
    if (records.empty()) {
        return windows;
    }
    std::stable_sort(records.begin(), records.end(),
                     [](const PacketRecord& x, const PacketRecord& y) { return x.timestamp < y.timestamp; });
    const auto last = static_cast<std::size_t>(std::floor(records.back().timestamp / window_len));
    windows.resize(last + 1);
    for (std::size_t w = 0; w <= last; ++w) {
        windows[w].index = w;
    }
    for (auto& r : records) {
        const auto w = static_cast<std::size_t>(std::floor(r.timestamp / window_len));
        windows[w].records.push_back(r);
    }
    return windows;
}

double normalized_entropy(std::span<const std::uint32_t> addresses) {
    if (addresses.empty()) {
        return 0.0;
    }
    std::map<std::uint32_t, std::size_t> counts;
    for (auto a : addresses) {
        ++counts[a];
    }
    const double total = static_cast<double>(addresses.size());
    double h = 0.0;
    for (const auto& [addr, c] : counts) {
        const double p = static_cast<double>(c) / total;
        h -= p * std::log2(p);
    }
    const double distinct = static_cast<double>(std::max<std::size_t>(counts.size(), 2));
    return std::clamp(h / std::log2(distinct), 0.0, 1.0);
}

FeatureVector extract_features(std::span<const PacketRecord> records) {
    FeatureVector f{};
    if (records.empty()) {
        return f;
    }
    std::uint64_t bytes = 0;
    std::size_t syn = 0, udp = 0, icmp = 0;
    std::vector<std::uint32_t> src, dst;
    src.reserve(records.size());
    dst.reserve(records.size());
    for (const auto& p : records) {
        bytes += p.length;
        syn += (p.protocol == Protocol::Tcp && p.syn) ? 1 : 0;
        udp += p.protocol == Protocol::Udp ? 1 : 0;
        icmp += p.protocol == Protocol::Icmp ? 1 : 0;
        src.push_back(p.src_ip);
        dst.push_back(p.dst_ip);
    }
    const double n = static_cast<double>(records.size());
    f[0] = n;
    f[1] = static_cast<double>(bytes);
    f[2] = static_cast<double>(bytes) / n;
    f[3] = normalized_entropy(src);
    f[4] = normalized_entropy(dst);
    f[5] = static_cast<double>(syn) / n;
    f[6] = static_cast<double>(udp) / n;
    f[7] = static_cast<double>(icmp) / n;
    return f;
}

Matrix featurize(std::vector<PacketRecord> records, double window_len) {
    Matrix m(0, kFeatureDim);
    for (const auto& w : windowize(std::move(records), window_len)) {
        m.append_row(extract_features(w.records));
    }
    return m;
}

void write_features(std::ostream& out, const Matrix& features) {
    out << "window_index";
    for (auto name : kFeatureNames) {
        out << ',' << name;
    }
    out << '\n';
    for (std::size_t r = 0; r < features.rows(); ++r) {
        out << r;
        for (double x : features.row(r)) {
            out << ',' << format_double(x);
        }
        out << '\n';
    }
}

void write_labels(std::ostream& out, const std::vector<bool>& labels) {
    out << kLabelHeader << '\n';
    for (std::size_t w = 0; w < labels.size(); ++w) {
        out << w << ',' << (labels[w] ? 1 : 0) << '\n';
    }
}

std::vector<bool> parse_labels(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || strip_cr(line) != kLabelHeader) {
        throw InputError(line_error(1, "expected header '" + std::string(kLabelHeader) + "'"));
    }
    std::vector<bool> labels;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view row = strip_cr(line);
        if (row.empty()) {
            continue;
        }
        const auto f = split(row, ',');
        std::size_t index = 0;
        if (f.size() != 2 || !parse_number(f[0], index) || (f[1] != "0" && f[1] != "1")) {
            throw InputError(line_error(line_no, "malformed label row"));
        }
        if (index != labels.size()) {
            throw InputError(line_error(line_no, "window indices must be contiguous from 0"));
        }
        labels.push_back(f[1] == "1");
    }
    return labels;
}

Normalizer fit_normalizer(const Matrix& features) {
    if (features.rows() == 0 || features.cols() == 0) {
        throw InputError("cannot fit a normalizer on an empty matrix");
    }
    require_finite(features.values(), "normalizer input");
    const std::size_t dim = features.cols();
    Normalizer n{Vector(features.row(0).begin(), features.row(0).end()),
                 Vector(features.row(0).begin(), features.row(0).end()), Vector(dim, 0.0), Vector(dim, 0.0)};
    for (std::size_t r = 1; r < features.rows(); ++r) {
        for (std::size_t d = 0; d < dim; ++d) {
            n.min[d] = std::min(n.min[d], features(r, d));
            n.max[d] = std::max(n.max[d], features(r, d));
        }
    }
    const double rows = static_cast<double>(features.rows());
    for (std::size_t r = 0; r < features.rows(); ++r) {
        for (std::size_t d = 0; d < dim; ++d) {
            n.mean[d] += features(r, d);
        }
    }
    for (double& m : n.mean) {
        m /= rows;
    }
    for (std::size_t r = 0; r < features.rows(); ++r) {
        for (std::size_t d = 0; d < dim; ++d) {
            const double diff = features(r, d) - n.mean[d];
            n.stddev[d] += diff * diff;
        }
    }
    for (double& s : n.stddev) {
        s = std::sqrt(s / rows);
    }
    return n;
}

Vector normalize(const Normalizer& n, std::span<const double> v) {
    require_size(v.size(), n.dim(), "normalize input");
    Vector out(v.size());
    for (std::size_t d = 0; d < v.size(); ++d) {
        const double span = n.max[d] - n.min[d];
        out[d] = span > 0.0 ? std::clamp((v[d] - n.min[d]) / span, 0.0, 1.0) : 0.5;
    }
    return out;
}

Vector standardize(const Normalizer& n, std::span<const double> v) {
    require_size(v.size(), n.dim(), "standardize input");
    Vector out(v.begin(), v.end());
    for (std::size_t d = 0; d < out.size(); ++d) {
        out[d] = (out[d] - n.mean[d]) / std::max(n.stddev[d], 1e-9);
    }
    return out;
}

Matrix standardize_rows(const Normalizer& n, const Matrix& features) {
    Matrix out(0, n.dim());
    for (std::size_t r = 0; r < features.rows(); ++r) {
        out.append_row(standardize(n, features.row(r)));
    }
    return out;
}

}  // namespace ddos
