#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "eegclean/nn/adam.hpp"
#include "eegclean/nn/network.hpp"
#include "eegclean/nn/train.hpp"

using namespace eegclean;
using namespace eegclean::nn;

namespace {

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(lo, hi);
  Matrix m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = d(rng);
  return m;
}

// Loss as a pure function of the current parameters, for finite differences.
double loss_of(const BiLstmNetwork& net, const Matrix& x, const Matrix& y, ForwardMode mode) {
  return mse_loss(forward(net, x, mode).output, y).loss;
}

// Max over all parameters of |analytic - numeric| / max(|analytic|, |numeric|, floor).
double max_fd_error(BiLstmNetwork net, const Matrix& x, const Matrix& y, ForwardMode mode,
                    const std::function<double(const BiLstmNetwork&)>& loss, const Gradients& analytic) {
  const double h = 1e-5;
  const double floor = 1e-6;
  double worst = 0.0;
  auto params = net.params.tensors();
  auto grads = analytic.tensors();
  for (std::size_t t = 0; t < NetworkParams::kTensorCount; ++t) {
    Matrix& p = *params[t];
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      const double saved = p.data()[i];
      p.data()[i] = saved + h;
      const double up = loss(net);
      p.data()[i] = saved - h;
      const double down = loss(net);
      p.data()[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double a = grads[t]->data()[i];
      const double denom = std::max({std::abs(a), std::abs(numeric), floor});
      worst = std::max(worst, std::abs(a - numeric) / denom);
    }
  }
  (void)x;
  (void)y;
  (void)mode;
  return worst;
}

BiLstmNetwork toy_net(std::size_t in, std::size_t hidden, std::size_t out, std::uint64_t seed) {
  auto net = init_network(in, hidden, out, seed);
  // Keep every pre-activation on the linear side of the ReLU so finite
  // differences do not straddle the kink.
  net.params.fc_b.setConstant(3.0);
  return net;
}

}  // namespace

TEST(Init, SameSeedBitwiseIdentical) {
  auto a = init_network(5, 6, 2, 42);
  auto b = init_network(5, 6, 2, 42);
  auto ta = a.params.tensors();
  auto tb = b.params.tensors();
  for (std::size_t i = 0; i < NetworkParams::kTensorCount; ++i) EXPECT_TRUE(*ta[i] == *tb[i]);
  auto c = init_network(5, 6, 2, 43);
  EXPECT_FALSE(c.params.layer1.forward.W == a.params.layer1.forward.W);
}

TEST(Init, DefaultShapes) {
  auto net = init_network(130, 150, 130, 1);
  EXPECT_EQ(net.params.layer2.forward.input_dim(), 300u);
  EXPECT_EQ(net.params.layer2.backward.input_dim(), 300u);
  EXPECT_EQ(net.params.fc_w.rows(), 130);
  EXPECT_EQ(net.params.fc_w.cols(), 300);
  EXPECT_EQ(net.params.layer1.forward.W.rows(), 600);
}

TEST(Init, ForgetBiasesAreOne) {
  auto net = init_network(3, 4, 2, 7);
  for (const LstmCellParams* cell : {&net.params.layer1.forward, &net.params.layer1.backward,
                                     &net.params.layer2.forward, &net.params.layer2.backward}) {
    for (int k = 0; k < 16; ++k) EXPECT_DOUBLE_EQ(cell->b(k, 0), (k >= 4 && k < 8) ? 1.0 : 0.0);
  }
}

TEST(Init, GlorotBounds) {
  auto net = init_network(10, 6, 3, 9);
  const double lim = std::sqrt(6.0 / (10.0 + 24.0));
  EXPECT_LE(net.params.layer1.forward.W.cwiseAbs().maxCoeff(), lim);
  EXPECT_GT(net.params.layer1.forward.W.cwiseAbs().maxCoeff(), 0.5 * lim);
}

TEST(Init, ZeroDimsRejected) {
  EXPECT_THROW(init_network(0, 4, 1, 1), ConfigError);
  EXPECT_THROW(init_network(3, 0, 1, 1), ConfigError);
  EXPECT_THROW(init_network(3, 4, 0, 1), ConfigError);
}

TEST(Forward, InferTwiceIdentical) {
  auto net = init_network(3, 5, 2, 11);
  Matrix x = random_matrix(3, 9, 12);
  EXPECT_TRUE(net.predict(x) == net.predict(x));
}

TEST(Forward, OutputShapeAndNonNegative) {
  auto net = init_network(4, 5, 3, 13);
  for (std::uint64_t s = 0; s < 5; ++s) {
    Matrix x = random_matrix(4, 11, 100 + s, -3.0, 3.0);
    auto infer = forward(net, x, ForwardMode::Infer()).output;
    auto train = forward(net, x, ForwardMode::Train(s)).output;
    EXPECT_EQ(infer.rows(), 3);
    EXPECT_EQ(infer.cols(), 11);
    EXPECT_GE(infer.minCoeff(), 0.0);
    EXPECT_GE(train.minCoeff(), 0.0);
  }
}

TEST(Forward, ShapeMismatchThrows) {
  auto net = init_network(3, 4, 1, 1);
  EXPECT_THROW(net.predict(Matrix::Zero(2, 5)), ShapeError);
  EXPECT_THROW(net.predict(Matrix::Zero(3, 0)), ShapeError);
}

TEST(Forward, BidirectionalSymmetry) {
  auto net = toy_net(2, 3, 2, 21);
  Matrix x = random_matrix(2, 3, 22);

  BiLstmNetwork mirrored = net;
  auto& p = mirrored.params;
  std::swap(p.layer1.forward, p.layer1.backward);
  std::swap(p.layer2.forward, p.layer2.backward);
  const Eigen::Index H = 3;
  // Layer 2 and the FC layer see [forward; backward] hidden states, which are
  // swapped in the mirrored network, so their input columns are swapped too.
  for (LstmCellParams* cell : {&p.layer2.forward, &p.layer2.backward}) {
    Matrix w = cell->W;
    cell->W.leftCols(H) = w.rightCols(H);
    cell->W.rightCols(H) = w.leftCols(H);
  }
  Matrix fw = p.fc_w;
  p.fc_w.leftCols(H) = fw.rightCols(H);
  p.fc_w.rightCols(H) = fw.leftCols(H);

  Matrix y = net.predict(x);
  Matrix y_rev = mirrored.predict(x.rowwise().reverse());
  EXPECT_LE((y_rev.rowwise().reverse() - y).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Forward, DropoutExpectationMatchesInfer) {
  auto net = init_network(3, 6, 2, 31);
  Matrix x = random_matrix(3, 4, 32);
  detail::LayerCache cache;
  Matrix act = detail::run_layer(net.params.layer1, x, cache);
  for (double rate : {net.dropout1, net.dropout2}) {
    Matrix sum = Matrix::Zero(act.rows(), act.cols());
    const int draws = 20000;
    for (int k = 0; k < draws; ++k)
      sum.array() += act.array() * detail::dropout_mask(act.rows(), act.cols(), rate, mix_seed(77, k)).array();
    Matrix mean = sum / draws;
    EXPECT_LE((mean - act).norm() / act.norm(), 0.02) << "rate " << rate;
  }
}

TEST(Forward, DropoutMaskRate) {
  Matrix m = detail::dropout_mask(100, 200, 0.3, 5);
  const double dropped = static_cast<double>((m.array() == 0.0).count()) / m.size();
  EXPECT_NEAR(dropped, 0.3, 0.01);
  EXPECT_NEAR(m.maxCoeff(), 1.0 / 0.7, 1e-15);
}

TEST(Forward, TrainModeSeedDeterministic) {
  auto net = init_network(3, 4, 2, 41);
  Matrix x = random_matrix(3, 6, 42);
  EXPECT_TRUE(forward(net, x, ForwardMode::Train(5)).output == forward(net, x, ForwardMode::Train(5)).output);
  EXPECT_FALSE(forward(net, x, ForwardMode::Train(5)).output == forward(net, x, ForwardMode::Train(6)).output);
}

TEST(MseLoss, Examples) {
  Matrix a(1, 2);
  a << 1.0, 2.0;
  auto r = mse_loss(a, Matrix::Zero(1, 2));
  EXPECT_DOUBLE_EQ(r.loss, 2.5);
  EXPECT_DOUBLE_EQ(r.grad(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(r.grad(0, 1), 2.0);

  auto same = mse_loss(a, a);
  EXPECT_EQ(same.loss, 0.0);
  EXPECT_EQ(same.grad.cwiseAbs().maxCoeff(), 0.0);

  Matrix b = random_matrix(3, 4, 1);
  EXPECT_DOUBLE_EQ(mse_loss(b.array() + 1.0, b).loss, 1.0);
  EXPECT_THROW(mse_loss(b, Matrix::Zero(4, 3)), ShapeError);
}

TEST(Backward, FiniteDifferenceSpecExample) {
  auto net = toy_net(3, 4, 2, 51);
  Matrix x = random_matrix(3, 5, 52);
  Matrix y = random_matrix(2, 5, 53);
  for (auto mode : {ForwardMode::Infer(), ForwardMode::Train(9)}) {
    auto fr = forward(net, x, mode);
    ASSERT_GT(fr.cache.pre_activation.minCoeff(), 0.0);
    auto g = backward(net, fr.cache, mse_loss(fr.output, y).grad);
    auto loss = [&](const BiLstmNetwork& n) { return loss_of(n, x, y, mode); };
    EXPECT_LE(max_fd_error(net, x, y, mode, loss, g), 1e-4);
  }
}

class GradientGrid : public ::testing::TestWithParam<std::tuple<int, int, int>> {};

TEST_P(GradientGrid, MatchesCentralDifferences) {
  const auto [hidden, T, features] = GetParam();
  const std::uint64_t seed = static_cast<std::uint64_t>(hidden * 100 + T * 10 + features);
  auto net = toy_net(static_cast<std::size_t>(features), static_cast<std::size_t>(hidden),
                     static_cast<std::size_t>(features), seed);
  Matrix x = random_matrix(features, T, seed + 1, -2.0, 2.0);
  Matrix y = random_matrix(features, T, seed + 2, 0.0, 4.0);
  const auto mode = ForwardMode::Train(seed + 3);
  auto fr = forward(net, x, mode);
  ASSERT_GT(fr.cache.pre_activation.minCoeff(), 0.0);
  auto g = backward(net, fr.cache, mse_loss(fr.output, y).grad);
  auto loss = [&](const BiLstmNetwork& n) { return loss_of(n, x, y, mode); };
  EXPECT_LE(max_fd_error(net, x, y, mode, loss, g), 1e-4);
}

INSTANTIATE_TEST_SUITE_P(Toys, GradientGrid,
                         ::testing::Combine(::testing::Values(2, 4, 8), ::testing::Values(3, 7),
                                            ::testing::Values(1, 5)));

TEST(Backward, ZeroLossGradGivesZeroGradients) {
  auto net = init_network(3, 4, 2, 61);
  auto fr = forward(net, random_matrix(3, 5, 62), ForwardMode::Train(1));
  auto g = backward(net, fr.cache, Matrix::Zero(2, 5));
  EXPECT_EQ(g.squared_norm(), 0.0);
}

TEST(Backward, LocalityOracle) {
  auto net = toy_net(3, 4, 2, 71);
  Matrix x = random_matrix(3, 6, 72);
  Matrix y = random_matrix(2, 6, 73);
  const Eigen::Index dropped = 2;
  auto fr = forward(net, x, ForwardMode::Infer());
  Matrix masked = mse_loss(fr.output, y).grad;
  masked.col(dropped).setZero();
  // Rescale from the full-sequence count to the restricted count.
  masked *= 6.0 / 5.0;
  auto g = backward(net, fr.cache, masked);

  auto restricted = [&](const BiLstmNetwork& n) {
    Matrix out = n.predict(x);
    double s = 0.0;
    for (Eigen::Index t = 0; t < out.cols(); ++t)
      if (t != dropped) s += (out.col(t) - y.col(t)).squaredNorm();
    return s / (5.0 * 2.0);
  };
  EXPECT_LE(max_fd_error(net, x, y, ForwardMode::Infer(), restricted, g), 1e-4);
}

TEST(Backward, StaleCacheRejected) {
  auto net = init_network(3, 4, 2, 81);
  Matrix x = random_matrix(3, 5, 82);
  auto fr = forward(net, x, ForwardMode::Infer());
  auto g = backward(net, fr.cache, Matrix::Ones(2, 5));
  TrainConfig cfg;
  auto state = AdamState::for_network(net);
  adam_step(net, g, state, cfg);
  EXPECT_THROW(backward(net, fr.cache, Matrix::Ones(2, 5)), StateError);

  auto other = init_network(3, 5, 2, 81);
  auto fr2 = forward(other, x, ForwardMode::Infer());
  EXPECT_THROW(backward(init_network(3, 4, 2, 1), fr2.cache, Matrix::Ones(2, 5)), StateError);
  EXPECT_THROW(backward(other, fr2.cache, Matrix::Ones(3, 5)), StateError);
}

TEST(Adam, ZeroGradientsLeaveParametersAndDecayMoments) {
  auto net = init_network(2, 3, 1, 91);
  const auto before = net.params;
  auto state = AdamState::for_network(net);
  for (Matrix* m : state.m.tensors()) m->setConstant(0.5);
  for (Matrix* v : state.v.tensors()) v->setConstant(0.25);
  state.step = 3;
  TrainConfig cfg;
  adam_step(net, net.params.zeros_like(), state, cfg);
  // Moments decay but stay nonzero, so parameters move by the momentum term only
  // when m is nonzero. With fresh (zero) moments nothing may move at all.
  EXPECT_DOUBLE_EQ(state.m.fc_b(0, 0), 0.45);
  EXPECT_DOUBLE_EQ(state.v.fc_b(0, 0), 0.25 * 0.999);
  EXPECT_EQ(state.step, 4u);

  auto fresh_net = init_network(2, 3, 1, 91);
  auto fresh = AdamState::for_network(fresh_net);
  adam_step(fresh_net, fresh_net.params.zeros_like(), fresh, cfg);
  auto a = fresh_net.params.tensors();
  auto b = before.tensors();
  for (std::size_t i = 0; i < NetworkParams::kTensorCount; ++i) EXPECT_TRUE(*a[i] == *b[i]);
}

TEST(Adam, FirstStepClosedForm) {
  auto net = init_network(1, 1, 1, 5);
  auto g = net.params.zeros_like();
  g.fc_b(0, 0) = 1.0;
  const double theta = net.params.fc_b(0, 0);
  auto state = AdamState::for_network(net);
  TrainConfig cfg;
  adam_step(net, g, state, cfg);
  EXPECT_NEAR(net.params.fc_b(0, 0), theta - 0.001 / (1.0 + 1e-8), 1e-18);
  EXPECT_EQ(net.version, 1u);
}

TEST(Adam, ShapeMismatchThrows) {
  auto net = init_network(2, 3, 1, 1);
  auto state = AdamState::for_network(net);
  auto other = init_network(2, 4, 1, 1);
  EXPECT_THROW(adam_step(net, other.params, state, TrainConfig{}), ShapeError);
}

TEST(Adam, IdenticalRunsBitwise) {
  auto run = [] {
    auto net = init_network(2, 3, 2, 3);
    auto state = AdamState::for_network(net);
    Matrix x = random_matrix(2, 4, 4), y = random_matrix(2, 4, 5, 0.0, 1.0);
    for (int s = 0; s < 5; ++s) {
      auto fr = forward(net, x, ForwardMode::Train(s));
      adam_step(net, backward(net, fr.cache, mse_loss(fr.output, y).grad), state, TrainConfig{});
    }
    return net.params;
  };
  auto a = run(), b = run();
  auto ta = a.tensors(), tb = b.tensors();
  for (std::size_t i = 0; i < NetworkParams::kTensorCount; ++i) EXPECT_TRUE(*ta[i] == *tb[i]);
}

TEST(Train, OverfitOneSample) {
  auto net = init_network(3, 16, 3, 101);
  std::vector<SequencePair> data{{random_matrix(3, 8, 102), random_matrix(3, 8, 103, 0.2, 1.5)}};
  const double initial = mse_loss(net.predict(data[0].input), data[0].target).loss;
  TrainConfig cfg;
  cfg.learning_rate = 0.02;
  cfg.epochs = 200;
  cfg.batch_size = 1;
  cfg.rng_seed = 104;
  auto hist = train(net, data, {}, cfg);
  const double final_loss = mse_loss(net.predict(data[0].input), data[0].target).loss;
  EXPECT_LT(final_loss, 0.01 * initial);
  EXPECT_LT(hist.epochs[49].train_loss, hist.epochs[0].train_loss);
  EXPECT_EQ(hist.epochs.back().steps, 200u);
}

TEST(Train, OneBatchPerEpochWhenBatchCoversData) {
  auto net = init_network(2, 3, 2, 111);
  std::vector<SequencePair> data;
  for (int i = 0; i < 4; ++i) data.push_back({random_matrix(2, 5, 200 + i), random_matrix(2, 5, 300 + i, 0.0, 1.0)});
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 10;
  auto hist = train(net, data, data, cfg);
  ASSERT_EQ(hist.epochs.size(), 3u);
  EXPECT_EQ(hist.epochs[0].steps, 1u);
  EXPECT_EQ(hist.epochs[2].steps, 3u);
  EXPECT_TRUE(std::isfinite(hist.epochs[2].val_rmse));
}

TEST(Train, DeterministicAcrossThreadCounts) {
  std::vector<SequencePair> data;
  for (int i = 0; i < 9; ++i) data.push_back({random_matrix(3, 6, 400 + i), random_matrix(2, 6, 500 + i, 0.0, 1.0)});
  auto run = [&](std::size_t threads) {
    auto net = init_network(3, 4, 2, 121);
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 4;
    cfg.rng_seed = 9;
    cfg.threads = threads;
    auto hist = train(net, data, data, cfg);
    return std::make_pair(net.params, hist);
  };
  auto [pa, ha] = run(1);
  auto [pb, hb] = run(3);
  auto ta = pa.tensors(), tb = pb.tensors();
  for (std::size_t i = 0; i < NetworkParams::kTensorCount; ++i) EXPECT_TRUE(*ta[i] == *tb[i]);
  for (std::size_t e = 0; e < ha.epochs.size(); ++e) {
    EXPECT_EQ(ha.epochs[e].train_loss, hb.epochs[e].train_loss);
    EXPECT_EQ(ha.epochs[e].val_rmse, hb.epochs[e].val_rmse);
  }
}

TEST(Train, EmptyDatasetRejected) {
  auto net = init_network(2, 3, 2, 1);
  EXPECT_THROW(train(net, {}, {}, TrainConfig{}), ConfigError);
}

TEST(Train, ShuffleIsPermutationAndSeeded) {
  auto a = shuffled_indices(20, 3);
  auto b = shuffled_indices(20, 3);
  EXPECT_EQ(a, b);
  auto sorted = a;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < 20; ++i) EXPECT_EQ(sorted[i], i);
  EXPECT_NE(a, shuffled_indices(20, 4));
}

TEST(Train, ClipGlobalNorm) {
  auto net = init_network(2, 3, 1, 1);
  auto g = net.params;
  const double before = std::sqrt(g.squared_norm());
  ASSERT_GT(before, 1.0);
  clip_global_norm(g, 1.0);
  EXPECT_NEAR(std::sqrt(g.squared_norm()), 1.0, 1e-12);
}
