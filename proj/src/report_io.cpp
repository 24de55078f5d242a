#include "esn/report_io.hpp"

#include "esn/config_io.hpp"
#include "esn/errors.hpp"
#include "json_util.hpp"

#include <iomanip>
#include <sstream>

namespace esn {

using detail::json;

namespace {

json matrix_to_json(const Matrix& m)
{
    json rows = json::array();
    for (Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Index c = 0; c < m.cols(); ++c) {
            row.push_back(m(r, c));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const json& j, const std::string& ctx)
{
    if (!j.is_array()) {
        throw DataError(ctx + ": expected an array of rows");
    }
    const auto rows = static_cast<Index>(j.size());
    const Index cols = rows == 0 ? 0 : static_cast<Index>(j.front().size());
    Matrix m(rows, cols);
    for (Index r = 0; r < rows; ++r) {
        const json& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Index>(row.size()) != cols) {
            throw DataError(ctx + ": ragged matrix at row " + std::to_string(r));
        }
        for (Index c = 0; c < cols; ++c) {
            m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
        }
    }
    return m;
}

json vector_to_json(const Vector& v)
{
    return std::vector<double>(v.data(), v.data() + v.size());
}

Vector vector_from_json(const json& j)
{
    const auto values = j.get<std::vector<double>>();
    return Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
}

} // namespace

json to_json(const EvaluationReport& r)
{
    json j;
    j["accuracy"] = r.accuracy;
    j["class_names"] = r.class_names;
    j["confusion"] = r.confusion;
    if (r.channel_accuracy) {
        j["channel_accuracy"] = *r.channel_accuracy;
        j["per_channel_accuracy"] = r.per_channel_accuracy;
    }
    j["seed"] = r.config.reservoir.seed;
    j["spectral_radius_warning"] = r.spectral_radius_warning;
    j["train_index"] = r.train_index;
    j["test_index"] = r.test_index;
    j["pretrain_index"] = r.pretrain_index;
    j["config"] = to_json(r.config);
    j["wall_time_s"] = r.wall_time_s;
    return j;
}

json to_json(const TrainedModel& m)
{
    json res;
    res["input"] = matrix_to_json(m.weights.input);
    std::vector<Index> rows;
    std::vector<Index> cols;
    std::vector<double> values;
    for (Index r = 0; r < m.weights.recurrent.outerSize(); ++r) {
        for (SparseMatrix::InnerIterator it(m.weights.recurrent, r); it; ++it) {
            rows.push_back(it.row());
            cols.push_back(it.col());
            values.push_back(it.value());
        }
    }
    res["recurrent"] = {{"size", m.weights.size()}, {"rows", rows}, {"cols", cols}, {"values", values}};
    res["gain"] = vector_to_json(m.weights.gain);
    res["bias"] = vector_to_json(m.weights.bias);

    json j;
    j["config"] = to_json(m.config);
    j["reservoir"] = std::move(res);
    j["feature_scaling"] = {{"mean", vector_to_json(m.encoding.feature_mean)},
                            {"scale", vector_to_json(m.encoding.feature_scale)}};
    j["readout"] = {{"class_names", m.readout.class_names}, {"weights", matrix_to_json(m.readout.weights)}};
    return j;
}

TrainedModel model_from_json(const json& j)
{
    TrainedModel m;
    try {
        detail::check_keys<DataError>(j, {"config", "reservoir", "feature_scaling", "readout"}, "model");
        try {
            m.config = experiment_config_from_json(j.at("config"));
        } catch (const ConfigError& e) {
            throw DataError(std::string("model config: ") + e.what());
        }
        const json& res = j.at("reservoir");
        detail::check_keys<DataError>(res, {"input", "recurrent", "gain", "bias"}, "model.reservoir");
        m.weights.input = matrix_from_json(res.at("input"), "model.reservoir.input");
        const json& rec = res.at("recurrent");
        const auto size = rec.at("size").get<Index>();
        const auto rows = rec.at("rows").get<std::vector<Index>>();
        const auto cols = rec.at("cols").get<std::vector<Index>>();
        const auto values = rec.at("values").get<std::vector<double>>();
        if (rows.size() != cols.size() || rows.size() != values.size()) {
            throw DataError("model.reservoir.recurrent: rows, cols and values differ in length");
        }
        std::vector<Eigen::Triplet<double>> triplets;
        triplets.reserve(values.size());
        for (std::size_t k = 0; k < values.size(); ++k) {
            if (rows[k] < 0 || rows[k] >= size || cols[k] < 0 || cols[k] >= size) {
                throw DataError("model.reservoir.recurrent: entry " + std::to_string(k) + " out of range");
            }
            triplets.emplace_back(rows[k], cols[k], values[k]);
        }
        m.weights.recurrent.resize(size, size);
        m.weights.recurrent.setFromTriplets(triplets.begin(), triplets.end());
        m.weights.gain = vector_from_json(res.at("gain"));
        m.weights.bias = vector_from_json(res.at("bias"));
        m.encoding = m.config.encoding();
        if (j.contains("feature_scaling")) {
            const json& fs = j.at("feature_scaling");
            detail::check_keys<DataError>(fs, {"mean", "scale"}, "model.feature_scaling");
            m.encoding.feature_mean = vector_from_json(fs.at("mean"));
            m.encoding.feature_scale = vector_from_json(fs.at("scale"));
        }
        const json& ro = j.at("readout");
        detail::check_keys<DataError>(ro, {"class_names", "weights"}, "model.readout");
        m.readout.class_names = ro.at("class_names").get<std::vector<std::string>>();
        m.readout.weights = matrix_from_json(ro.at("weights"), "model.readout.weights");
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed model: ") + e.what());
    }
    try {
        m.weights.check_shapes();
    } catch (const std::exception& e) {
        throw DataError(std::string("malformed model: ") + e.what());
    }
    if (m.readout.weights.cols() != m.weights.size()
        || m.readout.weights.rows() != static_cast<Index>(m.readout.class_names.size())) {
        throw DataError("malformed model: readout shape does not match reservoir and classes");
    }
    const Index scaled = m.encoding.feature_mean.size();
    if (m.encoding.feature_scale.size() != scaled
        || (scaled > 0 && (m.config.input_mode != InputMode::feature || scaled != m.weights.input_dim()))
        || (m.encoding.feature_scale.array() <= 0.0).any()) {
        throw DataError("malformed model: feature_scaling does not match the input layer");
    }
    return m;
}

std::string sweep_csv(std::span<const SweepRow> rows)
{
    std::ostringstream out;
    out << "parameter,seed,accuracy,runtime_s\n";
    out << std::setprecision(17);
    for (const SweepRow& r : rows) {
        out << r.value << ',' << r.seed << ',' << r.report.accuracy << ',' << r.report.wall_time_s << '\n';
    }
    return out.str();
}

} // namespace esn
