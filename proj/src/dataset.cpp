#include "esn/dataset.hpp"

#include "esn/errors.hpp"
#include "json_util.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>

namespace esn {

namespace {

namespace fs = std::filesystem;
using detail::json;

float decode_le(const unsigned char* p)
{
    const std::uint32_t bits = std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8)
                               | (std::uint32_t{p[2]} << 16) | (std::uint32_t{p[3]} << 24);
    float value;
    std::memcpy(&value, &bits, sizeof value);
    return value;
}

void encode_le(float value, unsigned char* p)
{
    std::uint32_t bits;
    std::memcpy(&bits, &value, sizeof bits);
    p[0] = static_cast<unsigned char>(bits & 0xFFu);
    p[1] = static_cast<unsigned char>((bits >> 8) & 0xFFu);
    p[2] = static_cast<unsigned char>((bits >> 16) & 0xFFu);
    p[3] = static_cast<unsigned char>((bits >> 24) & 0xFFu);
}

std::vector<unsigned char> read_exact(const fs::path& path, std::uintmax_t expected_bytes)
{
    std::error_code ec;
    const std::uintmax_t actual = fs::file_size(path, ec);
    if (ec) {
        throw DataError(path.string() + ": cannot read file (" + ec.message() + ")");
    }
    if (actual != expected_bytes) {
        throw DataError(path.string() + ": expected " + std::to_string(expected_bytes)
                        + " bytes, found " + std::to_string(actual));
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError(path.string() + ": cannot open file");
    }
    std::vector<unsigned char> bytes(static_cast<std::size_t>(expected_bytes));
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!in) {
        throw DataError(path.string() + ": short read");
    }
    return bytes;
}

void write_all(const fs::path& path, const std::vector<unsigned char>& bytes)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw DataError(path.string() + ": write failed");
    }
}

template <typename T>
T manifest_int(const json& j, const char* key, const std::string& ctx)
{
    const auto v = detail::required<long long, DataError>(j, key, ctx);
    if (v < 0) {
        throw DataError(ctx + ": '" + key + "' must be nonnegative");
    }
    return static_cast<T>(v);
}

} // namespace

Matrix Trial::channel_sequence(Index channel) const
{
    return signals.row(channel).transpose().cast<double>();
}

std::size_t Dataset::trial_count() const
{
    std::size_t n = 0;
    for (const auto& s : subjects) {
        n += s.trials.size();
    }
    return n;
}

std::vector<TrialPtr> Dataset::all_trials() const
{
    std::vector<TrialPtr> out;
    out.reserve(trial_count());
    for (const auto& s : subjects) {
        out.insert(out.end(), s.trials.begin(), s.trials.end());
    }
    return out;
}

std::vector<std::size_t> LabeledDataset::class_counts() const
{
    std::vector<std::size_t> counts(class_names.size(), 0);
    for (int l : labels) {
        counts.at(static_cast<std::size_t>(l)) += 1;
    }
    return counts;
}

Dataset load_dataset(const fs::path& manifest_path)
{
    std::ifstream in(manifest_path);
    if (!in) {
        throw DataError(manifest_path.string() + ": cannot open manifest");
    }
    json manifest;
    try {
        in >> manifest;
    } catch (const json::exception& e) {
        throw DataError(manifest_path.string() + ": invalid JSON (" + e.what() + ")");
    }
    const std::string ctx = manifest_path.string();
    detail::check_keys<DataError>(manifest,
                                  {"subjects", "channels", "sample_rate_hz", "samples_per_trial",
                                   "trials_per_subject"},
                                  ctx);

    Dataset data;
    data.channels = manifest_int<Index>(manifest, "channels", ctx);
    data.sample_rate_hz = manifest_int<int>(manifest, "sample_rate_hz", ctx);
    data.samples_per_trial = manifest_int<Index>(manifest, "samples_per_trial", ctx);
    const auto trials = manifest_int<std::size_t>(manifest, "trials_per_subject", ctx);
    if (!manifest.contains("subjects") || !manifest.at("subjects").is_array()) {
        throw DataError(ctx + ": 'subjects' must be an array");
    }

    const fs::path base = manifest_path.parent_path();
    const auto channels = static_cast<std::size_t>(data.channels);
    const auto samples = static_cast<std::size_t>(data.samples_per_trial);
    const std::uintmax_t data_bytes = std::uintmax_t{trials} * channels * samples * 4u;
    const std::uintmax_t label_bytes = std::uintmax_t{trials} * 4u * 4u;
    static constexpr std::array<const char*, 4> kRatingNames = {"valence", "arousal", "dominance",
                                                                "liking"};

    for (const json& entry : manifest.at("subjects")) {
        detail::check_keys<DataError>(entry, {"id", "data_file", "labels_file"}, ctx + ": subject");
        SubjectRecord subject;
        subject.id = detail::required<std::string, DataError>(entry, "id", ctx);
        const fs::path data_file =
            base / detail::required<std::string, DataError>(entry, "data_file", ctx);
        const fs::path labels_file =
            base / detail::required<std::string, DataError>(entry, "labels_file", ctx);

        const auto raw = read_exact(data_file, data_bytes);
        const auto raw_labels = read_exact(labels_file, label_bytes);

        for (std::size_t t = 0; t < trials; ++t) {
            auto trial = std::make_shared<Trial>();
            trial->signals.resize(data.channels, data.samples_per_trial);
            for (std::size_t c = 0; c < channels; ++c) {
                const unsigned char* row = raw.data() + ((t * channels + c) * samples) * 4u;
                for (std::size_t s = 0; s < samples; ++s) {
                    trial->signals(static_cast<Index>(c), static_cast<Index>(s)) =
                        decode_le(row + s * 4u);
                }
            }
            std::array<double, 4> r{};
            for (std::size_t k = 0; k < 4; ++k) {
                const std::size_t offset = (t * 4u + k) * 4u;
                r[k] = decode_le(raw_labels.data() + offset);
                if (!(r[k] >= 1.0 && r[k] <= 9.0)) {
                    throw DataError(labels_file.string() + ": byte offset " + std::to_string(offset)
                                    + ": " + kRatingNames[k] + " rating " + std::to_string(r[k])
                                    + " outside [1, 9]");
                }
            }
            trial->ratings = {r[0], r[1], r[2], r[3]};
            subject.trials.push_back(std::move(trial));
        }
        data.subjects.push_back(std::move(subject));
    }
    return data;
}

fs::path save_dataset(const Dataset& data, const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw DataError(dir.string() + ": cannot create directory (" + ec.message() + ")");
    }
    std::size_t trials = data.subjects.empty() ? 0 : data.subjects.front().trials.size();
    json subjects = json::array();
    for (const auto& subject : data.subjects) {
        if (subject.trials.size() != trials) {
            throw DataError("save_dataset: subjects must have equal trial counts");
        }
        const std::string data_name = subject.id + "_data.f32";
        const std::string label_name = subject.id + "_labels.f32";
        std::vector<unsigned char> bytes;
        bytes.resize(trials * static_cast<std::size_t>(data.channels * data.samples_per_trial) * 4u);
        std::vector<unsigned char> label_bytes(trials * 16u);
        unsigned char* p = bytes.data();
        for (std::size_t t = 0; t < trials; ++t) {
            const Trial& trial = *subject.trials[t];
            if (trial.channels() != data.channels || trial.samples() != data.samples_per_trial) {
                throw DataError("save_dataset: trial shape disagrees with dataset declaration");
            }
            for (Index c = 0; c < trial.channels(); ++c) {
                for (Index s = 0; s < trial.samples(); ++s) {
                    encode_le(trial.signals(c, s), p);
                    p += 4;
                }
            }
            const Ratings& r = trial.ratings;
            const std::array<double, 4> values = {r.valence, r.arousal, r.dominance, r.liking};
            for (std::size_t k = 0; k < 4; ++k) {
                encode_le(static_cast<float>(values[k]), label_bytes.data() + (t * 4u + k) * 4u);
            }
        }
        write_all(dir / data_name, bytes);
        write_all(dir / label_name, label_bytes);
        subjects.push_back({{"id", subject.id}, {"data_file", data_name}, {"labels_file", label_name}});
    }

    json manifest = {
        {"subjects", subjects},
        {"channels", data.channels},
        {"sample_rate_hz", data.sample_rate_hz},
        {"samples_per_trial", data.samples_per_trial},
        {"trials_per_subject", trials},
    };
    const fs::path path = dir / "manifest.json";
    std::ofstream out(path, std::ios::trunc);
    out << manifest.dump(2) << '\n';
    if (!out) {
        throw DataError(path.string() + ": write failed");
    }
    return path;
}

LabeledDataset label_dataset(const Dataset& data, const LabelScheme& scheme)
{
    scheme.validate();
    LabeledDataset out;
    out.scheme = scheme;
    out.class_names = scheme.class_names();
    const auto trials = data.all_trials();
    for (std::size_t i = 0; i < trials.size(); ++i) {
        if (const auto label = label_trial(trials[i]->ratings, scheme)) {
            out.trials.push_back(trials[i]);
            out.labels.push_back(*label);
            out.source_index.push_back(i);
        }
    }
    return out;
}

TrainTestSplit split_train_test(const LabeledDataset& data, double fraction, std::uint64_t seed)
{
    if (!(fraction > 0.0 && fraction < 1.0)) {
        throw ConfigError("train fraction must lie in (0, 1)");
    }
    if (data.size() == 0) {
        throw DataError("cannot split an empty dataset");
    }
    const auto counts = data.class_counts();
    std::vector<std::size_t> quota(counts.size(), 0);
    for (std::size_t k = 0; k < counts.size(); ++k) {
        if (counts[k] == 0) {
            continue;
        }
        if (counts[k] < 2) {
            throw DataError("class '" + data.class_names[k] + "' has " + std::to_string(counts[k])
                            + " trial; stratified splitting needs at least 2");
        }
        const auto want = static_cast<std::size_t>(std::llround(fraction * double(counts[k])));
        quota[k] = std::clamp<std::size_t>(want, 1, counts[k] - 1);
    }

    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    TrainTestSplit split;
    for (LabeledDataset* part : {&split.train, &split.test}) {
        part->class_names = data.class_names;
        part->scheme = data.scheme;
    }
    std::vector<std::size_t> taken(counts.size(), 0);
    for (std::size_t i : order) {
        const auto k = static_cast<std::size_t>(data.labels[i]);
        LabeledDataset& part = taken[k] < quota[k] ? split.train : split.test;
        taken[k] += (&part == &split.train) ? 1 : 0;
        part.trials.push_back(data.trials[i]);
        part.labels.push_back(data.labels[i]);
        part.source_index.push_back(data.source_index[i]);
    }
    return split;
}

} // namespace esn
