#include "condlab/binio.hpp"
#include "condlab/error.hpp"
#include "condlab/mixture.hpp"
#include "condlab/nop/checkpoint.hpp"
#include "condlab/nop/optim.hpp"
#include "condlab/nop/train.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

using namespace condlab;
using namespace condlab::nop;

namespace {

PairSet make_pairs(const Grid2D& g, std::uint64_t seed, std::size_t n) {
    PairSet ps{g, {}, {}};
    for (std::size_t k = 0; k < n; ++k) {
        auto rng = CounterRng::stream(seed, k);
        const auto r = render_pair(sample_params(1, ParamRanges{}, rng), g);
        ps.add({r.joint.values().begin(), r.joint.values().end()}, {r.kernel.values().begin(), r.kernel.values().end()});
    }
    return ps;
}

std::filesystem::path temp_path(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("condlab_test_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" + name);
}

} // namespace

TEST(Adam, FirstStepAndSteadyState) {
    Adam adam(2);
    std::vector<double> p{1.0, -1.0};
    const std::vector<double> g{0.3, -2.0};
    adam.step(p, g, 0.1);
    // bias correction makes the first step exactly lr * sign(g) up to eps
    EXPECT_NEAR(p[0], 0.9, 1e-8);
    EXPECT_NEAR(p[1], -0.9, 1e-8);
    for (int k = 0; k < 2000; ++k) {
        const double before = p[0];
        adam.step(p, g, 0.01);
        if (k > 1000) EXPECT_NEAR(before - p[0], 0.01, 1e-6);
    }
    EXPECT_EQ(adam.steps(), 2001u);
}

TEST(Plateau, ImprovingNeverReduces) {
    PlateauScheduler s(1e-3, 5, 0.5, 1e-4, 0.0);
    double loss = 1.0;
    for (int e = 0; e < 50; ++e) {
        loss *= 0.9;
        EXPECT_EQ(s.step(loss), 1e-3);
    }
    EXPECT_EQ(s.reductions(), 0u);
}

TEST(Plateau, SixFlatEpochsHalveOnce) {
    PlateauScheduler s(1e-3, 5, 0.5, 1e-4, 0.0);
    s.step(1.0);
    for (int e = 0; e < 5; ++e) EXPECT_EQ(s.step(1.0), 1e-3);
    EXPECT_EQ(s.step(1.0), 5e-4);
    EXPECT_EQ(s.reductions(), 1u);
    for (int e = 0; e < 5; ++e) EXPECT_EQ(s.step(1.0), 5e-4);
    EXPECT_EQ(s.step(1.0), 2.5e-4);
}

TEST(Plateau, ThresholdAndFloor) {
    PlateauScheduler s(1.0, 0, 0.1, 0.01, 0.05);
    s.step(1.0);
    EXPECT_DOUBLE_EQ(s.step(0.995), 0.1);  // improvement below 1% does not count
    EXPECT_DOUBLE_EQ(s.step(0.5), 0.1);
    EXPECT_DOUBLE_EQ(s.step(0.5), 0.05);
    EXPECT_DOUBLE_EQ(s.step(0.5), 0.05);
}

TEST(TrainConfig, Validation) {
    TrainConfig c;
    EXPECT_NO_THROW(c.validate());
    c.factor = 1.0;
    EXPECT_THROW(c.validate(), Error);
    c = {};
    c.batch_size = 0;
    EXPECT_THROW(c.validate(), Error);
    c = {};
    c.min_lr = 1.0;
    EXPECT_THROW(c.validate(), Error);
}

TEST(Summary, MedianConventions) {
    const auto odd = summarize({3.0, 1.0, 2.0});
    EXPECT_EQ(odd.median, 2.0);
    EXPECT_EQ(odd.max, 3.0);
    EXPECT_EQ(odd.mean, 2.0);
    EXPECT_EQ(summarize({4.0, 1.0, 2.0, 3.0}).median, 2.5);
}

TEST(BatchGradient, IndependentOfThreadCount) {
    const auto g = make_grid(-6, 6, 12, -6, 6, 12);
    const auto data = make_pairs(g, 3, 8);
    NOModel m(ModelSpec::spectral(g, 6, 3, 2, 8));
    m.initialize(1);
    const std::vector<std::size_t> batch{5, 0, 3, 7, 1};
    std::vector<double> a(m.num_params()), b(m.num_params());
    GradWorkspace ws;
    const double la = batch_gradient(m, data, batch, a, 0, ws);
    const double lb = batch_gradient(m, data, batch, b, 3, ws);
    EXPECT_EQ(la, lb);
    EXPECT_EQ(a, b);
}

TEST(Train, LossDecreasesAndTrajectoryIsBitIdentical) {
    const auto g = make_grid(-6, 6, 12, -6, 6, 12);
    const auto tr = make_pairs(g, 0, 24), va = make_pairs(g, 1, 6);
    TrainConfig c;
    c.batch_size = 4;
    c.learning_rate = 1e-2;
    c.max_epochs = 6;
    c.seed = 9;
    auto run = [&](std::size_t threads) {
        NOModel m(ModelSpec::spectral(g, 6, 3, 2, 8));
        m.initialize(2);
        c.threads = threads;
        const auto res = train(m, tr, va, c);
        return std::make_pair(std::vector<double>(m.params().begin(), m.params().end()), res);
    };
    const auto [p0, r0] = run(0);
    const auto [p1, r1] = run(0);
    const auto [p2, r2] = run(2);
    EXPECT_EQ(p0, p1);
    EXPECT_EQ(p0, p2);
    ASSERT_EQ(r0.history.size(), 6u);
    EXPECT_LT(r0.history.back().train_loss, r0.history.front().train_loss);
    for (std::size_t e = 0; e < 6; ++e) EXPECT_EQ(r0.history[e].val_loss, r2.history[e].val_loss);
    EXPECT_EQ(r0.best_val, r0.history[r0.best_epoch - 1].val_loss);
}

TEST(Train, RestoresBestValidationParameters) {
    const auto g = make_grid(-6, 6, 10, -6, 6, 10);
    const auto tr = make_pairs(g, 0, 8);
    NOModel m(ModelSpec::spectral(g, 4, 2, 1, 6));
    m.initialize(3);
    TrainConfig c;
    c.batch_size = 8;
    c.learning_rate = 0.5;  // large enough to make later epochs worse
    c.max_epochs = 8;
    const auto res = train(m, tr, PairSet{g, {}, {}}, c);
    EXPECT_DOUBLE_EQ(evaluate(m, tr).mean, res.best_val);
}

TEST(Train, OverfitsTinySet) {
    const auto g = make_grid(-6, 6, 16, -6, 6, 16);
    const auto tr = make_pairs(g, 5, 4);
    NOModel m(ModelSpec::spectral(g, 8, 4, 2, 16));
    m.initialize(4);
    TrainConfig c;
    c.batch_size = 4;
    c.learning_rate = 1e-2;
    c.max_epochs = 600;
    c.patience = 20;
    const auto before = evaluate(m, tr).median;
    train(m, tr, PairSet{g, {}, {}}, c);
    const auto after = evaluate(m, tr).median;
    EXPECT_LT(after, 0.1 * before);
}

TEST(Train, RejectsGridMismatch) {
    const auto g = make_grid(-6, 6, 10, -6, 6, 10);
    NOModel m(ModelSpec::spectral(g, 4, 2, 1, 6));
    EXPECT_THROW(train(m, make_pairs(make_grid(-6, 6, 12, -6, 6, 12), 0, 2), PairSet{}, TrainConfig{}), Error);
    PairSet ps{g, {}, {}};
    EXPECT_THROW(ps.add(std::vector<double>(99), std::vector<double>(100)), Error);
}

TEST(Checkpoint, RoundTripIsExact) {
    const auto g = make_grid(-5, 7, 12, -6, 6, 10);
    ModelSpec s = ModelSpec::spectral(g, 6, 3, 2, 8);
    s.hidden[1].basis = Basis::learned;
    s.hidden[1].rank = 2;
    s.hidden[0].activation = Activation::gelu_tanh;
    s.vec2fun = Vec2FunSpec{true, false, {{3}, Activation::relu}};
    NOModel m(s);
    m.initialize(11);
    const auto bytes = encode_checkpoint(Checkpoint::of(m));
    const auto back = decode_checkpoint(bytes);
    ASSERT_TRUE(back.model.has_value());
    EXPECT_EQ(back.kind, CheckpointKind::model);
    EXPECT_TRUE(back.model->spec() == s);
    EXPECT_TRUE(std::equal(m.params().begin(), m.params().end(), back.model->params().begin()));
    EXPECT_EQ(encode_checkpoint(back), bytes);

    const auto path = temp_path("model.cnop");
    save_checkpoint(path, Checkpoint::of(m));
    EXPECT_EQ(read_file(path), bytes);
    EXPECT_EQ(encode_checkpoint(load_checkpoint(path)), bytes);
    std::filesystem::remove(path);

    const auto oracle = decode_checkpoint(encode_checkpoint(Checkpoint::oracle(g)));
    EXPECT_EQ(oracle.kind, CheckpointKind::oracle);
    EXPECT_TRUE(oracle.grid == g);
    EXPECT_FALSE(oracle.model.has_value());
}

TEST(Checkpoint, CorruptionIsDetected) {
    const auto g = make_grid(-6, 6, 8, -6, 6, 8);
    NOModel m(ModelSpec::spectral(g, 4, 2, 1, 4));
    m.initialize(1);
    const auto bytes = encode_checkpoint(Checkpoint::of(m));
    auto rng = CounterRng::stream(77, 0);
    for (int t = 0; t < 500; ++t) {
        auto bad = bytes;
        const auto bit = rng.below(bad.size() * 8);
        bad[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
        try {
            decode_checkpoint(bad);
            ADD_FAILURE() << "flip at bit " << bit << " went unnoticed";
        } catch (const Error& e) {
            EXPECT_EQ(e.kind(), ErrorKind::format);
        }
    }
    std::vector<std::uint8_t> truncated(bytes.begin(), bytes.end() - 9);
    EXPECT_THROW(decode_checkpoint(truncated), Error);
    EXPECT_THROW(load_checkpoint(temp_path("missing.cnop")), Error);
}

TEST(ByteIo, LittleEndianLayoutAndCrc) {
    ByteWriter w;
    w.put_magic("CNOP");
    w.put_u32(0x01020304u);
    w.put_f64(1.0);
    const auto& b = w.bytes();
    EXPECT_EQ(b[0], 'C');
    EXPECT_EQ(b[4], 0x04);
    EXPECT_EQ(b[7], 0x01);
    EXPECT_EQ(b[15], 0x3f);
    EXPECT_EQ(b[14], 0xf0);
    const std::string s = "123456789";
    EXPECT_EQ(crc32(std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size())), 0xcbf43926u);
    ByteReader r(b, "probe");
    r.expect_magic("CNOP");
    EXPECT_EQ(r.u32(), 0x01020304u);
    EXPECT_EQ(r.f64(), 1.0);
    EXPECT_THROW(r.u8(), Error);
}
