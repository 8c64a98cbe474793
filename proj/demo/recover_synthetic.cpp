// Recovers a random 5x5x6 tensor of Tucker rank (1,2,2) from 360 Gaussian
// measurements with TIHT and with StoTIHT (b = m/4), printing the error per epoch.

#include <cstdio>

#include "stotiht/stotiht.hpp"

int main() {
  using namespace stotiht;
  const Shape shape{5, 5, 6};
  const RankTuple rank{1, 2, 2};
  const std::size_t m = 360;

  Rng rng(7);
  const DenseTensor target = reconstruct(random_tucker(shape, rank, rng));
  const SensingOperator op = gaussian_operator(shape, m, rng);
  const Vector y = apply(op, target);

  for (std::size_t b : {m, m / 4}) {
    const SolverConfig cfg{.rank = rank, .mu = 0.46 * m, .batch_size = b, .max_epochs = 100, .seed = 1};
    const RunResult res = run(op, y, cfg, target);
    std::printf("%s (b = %zu): %s after %zu epochs\n", b == m ? "TIHT" : "StoTIHT", b, to_string(res.trace.status),
                res.trace.epochs.size());
    for (const auto& rec : res.trace.epochs)
      if (rec.epoch % 5 == 0 || rec.epoch == res.trace.epochs.size())
        std::printf("  epoch %3zu  cost %.3e  rel_error %.3e\n", rec.epoch, rec.cost, *rec.rel_error);
  }
}
