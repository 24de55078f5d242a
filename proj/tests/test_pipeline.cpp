#include "esn/config_io.hpp"
#include "esn/errors.hpp"
#include "esn/pipeline.hpp"
#include "esn/report_io.hpp"

#include <doctest.h>

#include <algorithm>
#include <array>
#include <set>

using namespace esn;

namespace {

const LabeledDataset& small_data()
{
    static const LabeledDataset data = [] {
        SyntheticSpec spec;
        spec.trials_per_class = 20;
        spec.channels = 4;
        spec.samples = 384;
        return generate_synthetic(spec);
    }();
    return data;
}

ExperimentConfig small_config()
{
    ExperimentConfig c;
    c.reservoir.reservoir_size = 100;
    c.reservoir.seed = 5;
    c.plasticity.rule = IpConfig{};
    c.plasticity.max_sequences = 8;
    c.split_seed = 5;
    return c;
}

nlohmann::json without_time(const EvaluationReport& r)
{
    nlohmann::json j = to_json(r);
    j.erase("wall_time_s");
    return j;
}

} // namespace

TEST_CASE("report accounting identities")
{
    const EvaluationReport r = run_experiment(small_config(), small_data());
    CHECK(r.accuracy >= 0.0);
    CHECK(r.accuracy <= 1.0);
    REQUIRE(r.confusion.size() == 2);
    std::size_t total = 0, trace = 0;
    for (std::size_t k = 0; k < 2; ++k) {
        std::size_t row = 0;
        for (std::size_t p = 0; p < 2; ++p) {
            row += r.confusion[k][p];
        }
        CHECK(row == 4);
        total += row;
        trace += r.confusion[k][k];
    }
    CHECK(r.accuracy == doctest::Approx(static_cast<double>(trace) / static_cast<double>(total)));
    CHECK(r.test_index.size() == 8);
    CHECK(r.train_index.size() == 32);
    CHECK(r.per_channel_accuracy.size() == 4);
    REQUIRE(r.channel_accuracy.has_value());
    CHECK(*r.channel_accuracy >= 0.0);
    CHECK(r.wall_time_s > 0.0);
    CHECK_FALSE(r.spectral_radius_warning);
    CHECK(r.config.reservoir.input_dim == 1);
    CHECK(r.config.reservoir.output_dim == 2);
}

TEST_CASE("high-SNR synthetic task is learned")
{
    const EvaluationReport r = run_experiment(small_config(), small_data());
    CHECK(r.accuracy >= 0.9);
}

TEST_CASE("runs are deterministic apart from wall time")
{
    const ExperimentConfig c = small_config();
    CHECK(without_time(run_experiment(c, small_data())) == without_time(run_experiment(c, small_data())));
    CHECK(without_time(run_experiment(with_seed(c, 6), small_data())) != without_time(run_experiment(c, small_data())));
}

TEST_CASE("train, test and pretraining trials are kept apart")
{
    ExperimentConfig c = small_config();
    c.plasticity.max_sequences = 0;
    const PreparedExperiment p = prepare_experiment(c, small_data());
    const std::set<std::size_t> train(p.split.train.source_index.begin(), p.split.train.source_index.end());
    for (std::size_t i : p.split.test.source_index) {
        CHECK(train.count(i) == 0);
    }
    CHECK(p.pretrain_index.size() == train.size());
    for (std::size_t i : p.pretrain_index) {
        CHECK(train.count(i) == 1);
    }

    c.plasticity.max_sequences = 5;
    const PreparedExperiment q = prepare_experiment(c, small_data());
    CHECK(q.pretrain_index.size() <= 5);
    for (std::size_t i : q.pretrain_index) {
        CHECK(train.count(i) == 1);
    }
}

TEST_CASE("IP changes only gain and bias relative to an unadapted run")
{
    ExperimentConfig plain = small_config();
    plain.plasticity.rule.reset();
    const PreparedExperiment a = prepare_experiment(plain, small_data());
    const PreparedExperiment b = prepare_experiment(small_config(), small_data());
    CHECK(a.weights.input == b.weights.input);
    CHECK(Matrix(a.weights.recurrent) == Matrix(b.weights.recurrent));
    CHECK(a.weights.gain != b.weights.gain);
    CHECK(a.pretrain_index.empty());
}

TEST_CASE("signal mode yields one design row per channel")
{
    const PreparedExperiment p = prepare_experiment(small_config(), small_data());
    CHECK(p.rows_per_trial == 4);
    CHECK(p.train.states.rows() == 32 * 4);
    CHECK(p.test_states.rows() == 8 * 4);
    CHECK(p.train.targets.rows() == 32 * 4);
}

TEST_CASE("feature mode drives a single static vector")
{
    ExperimentConfig c = small_config();
    c.input_mode = InputMode::feature;
    const InputEncoding e = c.encoding();
    CHECK(e.input_dim(4) == 16);
    const auto seqs = e.sequences(*small_data().trials[0]);
    REQUIRE(seqs.size() == 1);
    CHECK(seqs[0].rows() == 10);
    CHECK(seqs[0].cols() == 16);
    CHECK(seqs[0].row(0) == seqs[0].row(9));
    CHECK(e.harvest_washout() == 0);

    const PreparedExperiment p = prepare_experiment(c, small_data());
    CHECK(p.rows_per_trial == 1);
    CHECK(p.weights.input_dim() == 16);
    const EvaluationReport r = evaluate(p, train_readout(p.train, c.readout, small_data().class_names));
    CHECK_FALSE(r.channel_accuracy.has_value());
    CHECK(r.per_channel_accuracy.empty());
}

TEST_CASE("classify_trial")
{
    TrainedModel m;
    const EvaluationReport r = run_experiment(small_config(), small_data(), m);
    const InputEncoding& e = m.encoding;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < small_data().size(); ++i) {
        correct += classify_trial(m.weights, m.readout, *small_data().trials[i], e)
                   == static_cast<std::size_t>(small_data().labels[i]);
    }
    CHECK(correct >= 36);

    ReadoutWeights constant;
    constant.weights = Matrix::Zero(2, 100);
    // every channel score ties, so every channel votes 0
    CHECK(classify_trial(m.weights, constant, *small_data().trials[1], e) == 0);

    CHECK_THROWS_AS(classify_trial(m.weights, ReadoutWeights{}, *small_data().trials[0], e), ConfigError);
}

TEST_CASE("readout modes")
{
    const ExperimentConfig c = small_config();
    const PreparedExperiment p = prepare_experiment(c, small_data());
    ReadoutSettings s = c.readout;
    s.mode = ReadoutMode::offline;
    const ReadoutWeights off = train_readout(p.train, s, small_data().class_names);
    s.mode = ReadoutMode::hybrid;
    s.epochs = 0;
    CHECK(train_readout(p.train, s, small_data().class_names).weights == off.weights);
    s.mode = ReadoutMode::online;
    s.epochs = 0;
    CHECK(train_readout(p.train, s, small_data().class_names).weights == Matrix::Zero(2, 100));
}

TEST_CASE("sweep rows, order and flags")
{
    ExperimentConfig c = small_config();
    c.plasticity.rule.reset();
    const std::vector<double> radii{0.1, 0.5, 0.85, 1.1};
    const auto rows = sweep(c, SweepParameter::spectral_radius, radii, small_data());
    REQUIRE(rows.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(rows[i].value == radii[i]);
        CHECK(rows[i].report.config.reservoir.spectral_radius == radii[i]);
        CHECK(rows[i].report.spectral_radius_warning == (radii[i] >= 1.0));
    }

    const std::vector<std::uint64_t> seeds{1, 2};
    const std::vector<double> three{0.3, 0.6, 0.9};
    const auto serial = sweep(c, SweepParameter::spectral_radius, three, small_data(), seeds, 1);
    const auto parallel = sweep(c, SweepParameter::spectral_radius, three, small_data(), seeds, 3);
    REQUIRE(serial.size() == 6);
    REQUIRE(parallel.size() == 6);
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(serial[i].value == three[i / 2]);
        CHECK(serial[i].seed == seeds[i % 2]);
        CHECK(parallel[i].value == serial[i].value);
        CHECK(parallel[i].seed == serial[i].seed);
        CHECK(without_time(parallel[i].report) == without_time(serial[i].report));
    }

    const std::string csv = sweep_csv(serial);
    CHECK(csv.rfind("parameter,seed,accuracy,runtime_s\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
}

TEST_CASE("sweep parameter validation")
{
    ExperimentConfig c = small_config();
    c.plasticity.rule.reset();
    const std::vector<double> epochs{1, 2};
    CHECK_THROWS_AS(sweep(c, SweepParameter::plasticity_epochs, epochs, small_data()), ConfigError);
    const std::vector<double> sizes{10.5};
    CHECK_THROWS_AS(sweep(c, SweepParameter::reservoir_size, sizes, small_data()), ConfigError);
    CHECK_THROWS_AS(sweep(c, SweepParameter::spectral_radius, std::vector<double>{}, small_data()), ConfigError);

    c.plasticity.rule = IpConfig{};
    const std::vector<double> one{1};
    const auto rows = sweep(c, SweepParameter::plasticity_epochs, one, small_data());
    CHECK(epochs_of(*rows[0].report.config.plasticity.rule) == 1);
}

TEST_CASE("larger reservoirs do not lose accuracy")
{
    ExperimentConfig c = small_config();
    c.input_mode = InputMode::feature;
    const std::vector<double> sizes{100, 500, 1500};
    const std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    SyntheticSpec spec;
    spec.trials_per_class = 30;
    spec.channels = 4;
    spec.samples = 384;
    spec.snr = 0.05;
    const LabeledDataset noisy = generate_synthetic(spec);
    const auto rows = sweep(c, SweepParameter::reservoir_size, sizes, noisy, seeds);
    std::array<double, 3> mean{};
    for (const SweepRow& r : rows) {
        const auto k = static_cast<std::size_t>(std::find(sizes.begin(), sizes.end(), r.value) - sizes.begin());
        mean[k] += r.report.accuracy / 5.0;
    }
    MESSAGE("mean accuracy by size: " << mean[0] << " " << mean[1] << " " << mean[2]);
    CHECK(mean[1] >= mean[0] - 0.05);
    CHECK(mean[2] >= mean[0] - 0.05);
}

TEST_CASE("config validation and dimension consistency")
{
    ExperimentConfig c = small_config();
    c.train_fraction = 1.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = small_config();
    c.reservoir.input_dim = 7;
    CHECK_THROWS_AS(prepare_experiment(c, small_data()), ConfigError);
    c = small_config();
    c.readout.ridge = -1.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    CHECK_THROWS_AS(run_experiment(small_config(), LabeledDataset{}), DataError);
}

TEST_CASE("experiment config JSON round-trip and strictness")
{
    ExperimentConfig c = small_config();
    c.manifest = "data/manifest.json";
    c.plasticity.rule = BcmConfig{2e-3, 50.0, 7, 1e-5};
    c.readout.mode = ReadoutMode::online;
    c.input_mode = InputMode::feature;
    c.scheme = {SchemeKind::EightStates, 4.5};
    c.features.measure = PowerMeasure::log_mean_square;
    c.sweep = SweepSettings{SweepParameter::reservoir_size, {100, 200}, {1, 2, 3}};
    const nlohmann::json j = to_json(c);
    const ExperimentConfig back = experiment_config_from_json(j);
    CHECK(to_json(back) == j);
    CHECK(std::get<BcmConfig>(*back.plasticity.rule).threshold_time_constant == 50.0);

    nlohmann::json typo = j;
    typo["reservoir"]["sise"] = 10;
    CHECK_THROWS_AS(experiment_config_from_json(typo), ConfigError);
    nlohmann::json wrong_rule_key = j;
    wrong_rule_key["plasticity"]["target_std"] = 0.3;
    CHECK_THROWS_AS(experiment_config_from_json(wrong_rule_key), ConfigError);
    nlohmann::json bad_type = j;
    bad_type["split"]["seed"] = "seven";
    CHECK_THROWS_AS(experiment_config_from_json(bad_type), ConfigError);
    nlohmann::json zero_epochs = j;
    zero_epochs["plasticity"]["epochs"] = 0;
    CHECK_THROWS_AS(experiment_config_from_json(zero_epochs), ConfigError);
    nlohmann::json bad_mode = j;
    bad_mode["readout"]["mode"] = "batch";
    CHECK_THROWS_AS(experiment_config_from_json(bad_mode), ConfigError);

    const ExperimentConfig defaults = experiment_config_from_json(nlohmann::json::object());
    CHECK(defaults.reservoir.reservoir_size == 2500);
    CHECK(defaults.reservoir.spectral_radius == 0.85);
    CHECK_FALSE(defaults.plasticity.rule.has_value());
    CHECK(defaults.readout.mode == ReadoutMode::hybrid);
}

TEST_CASE("synthetic spec JSON")
{
    SyntheticSpec s;
    s.classes = 4;
    s.scheme.kind = SchemeKind::EightStates;
    s.snr = 2.5;
    const SyntheticSpec back = synthetic_spec_from_json(to_json(s));
    CHECK(to_json(back) == to_json(s));
    nlohmann::json j = to_json(s);
    j["noise"] = 1;
    CHECK_THROWS_AS(synthetic_spec_from_json(j), ConfigError);
}

TEST_CASE("model JSON round-trip reproduces the evaluation")
{
    TrainedModel m;
    const EvaluationReport r = run_experiment(small_config(), small_data(), m);
    const TrainedModel back = model_from_json(nlohmann::json::parse(to_json(m).dump()));
    CHECK(back.weights.input == m.weights.input);
    CHECK(Matrix(back.weights.recurrent) == Matrix(m.weights.recurrent));
    CHECK(back.weights.gain == m.weights.gain);
    CHECK(back.readout.weights == m.readout.weights);
    CHECK(back.encoding.feature_mean.size() == 0);

    const TrainTestSplit split = split_train_test(small_data(), m.config.train_fraction, m.config.split_seed);
    const EvaluationReport again = evaluate_model(back, split.test);
    CHECK(again.accuracy == r.accuracy);
    CHECK(again.confusion == r.confusion);
    CHECK(again.test_index == r.test_index);

    nlohmann::json broken = to_json(m);
    broken["readout"]["weights"] = nlohmann::json::array({nlohmann::json::array({1.0})});
    CHECK_THROWS_AS(model_from_json(broken), DataError);
}

TEST_CASE("feature standardization is fitted on the train split and saved")
{
    ExperimentConfig c = small_config();
    c.input_mode = InputMode::feature;
    TrainedModel m;
    const EvaluationReport r = run_experiment(c, small_data(), m);
    REQUIRE(m.encoding.feature_mean.size() == 16);
    const TrainTestSplit split = split_train_test(small_data(), c.train_fraction, c.split_seed);
    Matrix f(static_cast<Index>(split.train.size()), 16);
    for (std::size_t i = 0; i < split.train.size(); ++i) {
        f.row(static_cast<Index>(i)) = m.encoding.feature_drive(*split.train.trials[i]).transpose();
    }
    CHECK(f.colwise().mean().cwiseAbs().maxCoeff() < 1e-12);
    CHECK((f.colwise().squaredNorm() / static_cast<double>(f.rows())).maxCoeff() == doctest::Approx(1.0 / 16.0));

    const TrainedModel back = model_from_json(nlohmann::json::parse(to_json(m).dump()));
    CHECK(back.encoding.feature_mean == m.encoding.feature_mean);
    CHECK(back.encoding.feature_scale == m.encoding.feature_scale);
    CHECK(evaluate_model(back, split.test).accuracy == r.accuracy);

    const InputEncoding signal = fit_feature_scaling(small_config().encoding(), split.train);
    CHECK(signal.feature_mean.size() == 0);
}

TEST_CASE("report JSON carries the config echo")
{
    const EvaluationReport r = run_experiment(small_config(), small_data());
    const nlohmann::json j = to_json(r);
    CHECK(j.at("config") == to_json(r.config));
    CHECK(j.at("seed") == 5);
    CHECK(j.contains("wall_time_s"));
    CHECK(j.at("confusion").size() == 2);
}

TEST_CASE("enum names round-trip")
{
    for (ReadoutMode m : {ReadoutMode::offline, ReadoutMode::online, ReadoutMode::hybrid}) {
        CHECK(readout_mode_from_string(to_string(m)) == m);
    }
    for (InputMode m : {InputMode::signal, InputMode::feature}) {
        CHECK(input_mode_from_string(to_string(m)) == m);
    }
    for (SweepParameter p :
         {SweepParameter::spectral_radius, SweepParameter::reservoir_size, SweepParameter::plasticity_epochs}) {
        CHECK(sweep_parameter_from_string(to_string(p)) == p);
    }
    CHECK_THROWS_AS(readout_mode_from_string("ridge"), ConfigError);
    CHECK(plasticity_rule_name(plasticity_rule_from_name("oja")) == "oja");
    CHECK_FALSE(plasticity_rule_from_name("none").has_value());
    CHECK_THROWS_AS(plasticity_rule_from_name("hebb"), ConfigError);
}
