"""How far below CPMG can an optimized schedule push chi?  Multi-start scan over N."""
from ddforge import filters as F
from ddforge import optimize as O
from ddforge import sequences as S
from ddforge.noise import OUNoiseParams

noise = OUNoiseParams.from_khz(80.0, 0.5, 0.8)
for N in (2, 4, 8, 12, 16):
    rep = O.optimize(O.OptimizationProblem(N, 1.0, noise), O.NelderMeadConfig(n_starts=20), seed=0)
    cp = F.chi(noise, S.cpmg(N, 1.0))
    ud = F.chi(noise, S.udd(N, 1.0))
    print(f"N={N:>2}  chi_opt {rep.J:.4e}  CPMG {cp:.4e}  UDD {ud:.4e}  gain over CPMG {1 - rep.J / cp:6.2%}")
