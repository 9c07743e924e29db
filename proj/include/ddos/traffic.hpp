#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ddos/linalg.hpp"
#include "ddos/random.hpp"

namespace ddos {

enum class Protocol { Tcp, Udp, Icmp };

std::string_view protocol_name(Protocol p);

struct PacketRecord {
    double timestamp = 0.0;  // seconds
    std::uint32_t src_ip = 0;
    std::uint32_t dst_ip = 0;
    Protocol protocol = Protocol::Tcp;
    std::uint32_t length = 64;  // bytes
    bool syn = false;           // TCP only

    bool operator==(const PacketRecord&) const = default;
};

std::string format_ipv4(std::uint32_t addr);

/// Parses a dotted quad; throws InputError on anything else.
std::uint32_t parse_ipv4(std::string_view text);

/// Reads `timestamp,src_ip,dst_ip,protocol,length,syn` CSV. Errors name the line.
std::vector<PacketRecord> parse_packets(std::istream& in);
void write_packets(std::ostream& out, std::span<const PacketRecord> records);

// ---------------------------------------------------------------------------
// Scenarios and synthetic traffic

enum class AttackKind { SynFlood, UdpFlood, IcmpFlood };

struct AttackSpec {
    double start = 0.0;
    double end = 0.0;
    AttackKind kind = AttackKind::SynFlood;
    double multiplier = 1.0;        // attack rate as a multiple of the baseline rate
    std::uint32_t source_pool = 1;  // number of spoofed source addresses
};

struct Scenario {
    double duration = 600.0;
    double baseline_rate = 100.0;  // packets per second
    double diurnal_amplitude = 0.1;
    std::vector<AttackSpec> attacks;

    void validate() const;
};

/// Field names mirror the struct; attack kinds are "SynFlood", "UdpFlood", "IcmpFlood".
Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const Scenario& s);

/// Built-in scenarios: "quiet", "syn10", "mixed". Throws InputError for other names.
Scenario preset_scenario(std::string_view name);

struct GeneratedTraffic {
    std::vector<PacketRecord> records;  // sorted by timestamp
    std::vector<bool> labels;           // per window; true iff the window overlaps an attack
};

/// Legitimate traffic is a nonhomogeneous Poisson process with rate
/// baseline * (1 + amplitude * sin(2 pi t / duration)), drawn by thinning.
/// Each attack adds a homogeneous Poisson stream at multiplier * baseline.
GeneratedTraffic generate_traffic(const Scenario& scenario, Rng& rng, double window_len = 1.0);

/// Number of windows of width `window_len` needed to cover `duration`.
std::size_t window_count(double duration, double window_len);

// ---------------------------------------------------------------------------
// Windows and features

struct Window {
    std::size_t index = 0;
    std::vector<PacketRecord> records;
};

/// Bins records into windows floor(t / window_len), contiguous from 0 to the
/// last non-empty window. Empty windows in between are kept.
std::vector<Window> windowize(std::vector<PacketRecord> records, double window_len);

inline constexpr std::size_t kFeatureDim = 8;
inline constexpr std::array<std::string_view, kFeatureDim> kFeatureNames = {
    "packet_count", "byte_count",   "mean_packet_size", "src_ip_entropy",
    "dst_ip_entropy", "syn_fraction", "udp_fraction",     "icmp_fraction"};

using FeatureVector = std::array<double, kFeatureDim>;

/// Shannon entropy (bits) of the address distribution, divided by
/// log2(max(distinct, 2)) so that it lies in [0, 1].
double normalized_entropy(std::span<const std::uint32_t> addresses);

/// Eight per-window statistics; an empty window yields all zeros.
FeatureVector extract_features(std::span<const PacketRecord> records);

/// One feature row per window of `windowize(records, window_len)`.
Matrix featurize(std::vector<PacketRecord> records, double window_len);

void write_features(std::ostream& out, const Matrix& features);
void write_labels(std::ostream& out, const std::vector<bool>& labels);
std::vector<bool> parse_labels(std::istream& in);

// ---------------------------------------------------------------------------
// Normalization

/// Per-dimension training statistics. min/max drive clamped min-max scaling
/// to [0, 1]; mean/stddev (population) standardize raw features for the
/// Gaussian first layer of the DBN.
struct Normalizer {
    Vector min;
    Vector max;
    Vector mean;
    Vector stddev;

    std::size_t dim() const { return min.size(); }
    bool operator==(const Normalizer&) const = default;
};

Normalizer fit_normalizer(const Matrix& features);

/// Min-max scaled and clamped into [0, 1].
Vector normalize(const Normalizer& n, std::span<const double> v);

/// (x - mean) / max(stddev, 1e-9) on raw features. Not clamped, so traffic far
/// outside the training range stays far from zero.
Vector standardize(const Normalizer& n, std::span<const double> v);

Matrix standardize_rows(const Normalizer& n, const Matrix& features);

}  // namespace ddos
