// Reconstructs one simulated phantom with TpV-CP from a zero start and from
// an MBIR-K initial guess, and prints iterations and SSIM for both.
//
//   warm_start [side] [angles]

#include <cstdio>
#include <cstdlib>

#include <dgct/experiment.hpp>

using namespace dgct;

int main(int argc, char** argv)
{
    const int side = argc > 1 ? std::atoi(argv[1]) : 64;
    const int angles = argc > 2 ? std::atoi(argv[2]) : 30;
    const FanBeamGeometry g = build_geometry(side, angles, 180);

    PhantomSpec ps;
    ps.side = side;
    ps.seed = 7;
    const Image gt = generate_phantom(ps);
    const Sinogram y = simulate_sinogram(g, gt, 0.01, 11);

    MethodOptions m;
    m.cfg.lambda = 1.0;
    m.cfg.p = 0.5;
    m.cfg.tol = 1e-3;
    m.cfg.max_total_iters = 3000;

    InitSpec zeros, mbir;
    mbir.name = "mbir-k";
    mbir.coarse_cfg.lambda = 2.0;
    std::printf("FBP         SSIM %6.2f\n", ssim(fbp_reconstruct(g, y), gt));
    for (const InitSpec* init : {&zeros, &mbir}) {
        const BenchmarkRow r = run_cell(m, *init, nullptr, g, y, gt, 0.01);
        std::printf("%-11s SSIM %6.2f after %4d iterations (%s)\n", init->name.c_str(), r.ssim_out, r.iters,
                    r.stop_reason.c_str());
    }
}
