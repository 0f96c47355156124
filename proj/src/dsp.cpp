#include "pcgseg/dsp.hpp"

#include "pcgseg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>

namespace pcgseg::dsp {

namespace {
constexpr double kPi = std::numbers::pi;
}

// ---------------------------------------------------------------- framing

std::vector<double> hamming_window(int length) {
    std::vector<double> w(static_cast<std::size_t>(length));
    if (length == 1) {
        w[0] = 1.0;
        return w;
    }
    for (int n = 0; n < length; ++n)
        w[static_cast<std::size_t>(n)] =
            0.54 - 0.46 * std::cos(2.0 * kPi * n / (length - 1));
    return w;
}

std::pair<FrameGrid, std::vector<std::vector<double>>>
frame_signal(const std::vector<double>& samples, int sample_rate_hz,
             double win_ms, double shift_ms) {
    const int len = static_cast<int>(std::lround(win_ms * sample_rate_hz / 1000.0));
    const int shift = static_cast<int>(std::lround(shift_ms * sample_rate_hz / 1000.0));
    if (len <= 0 || shift <= 0)
        throw DataError("frame_signal: window and shift must be positive");
    if (shift > len)
        throw DataError("frame_signal: frame shift exceeds window length");
    const auto n = static_cast<int>(samples.size());
    if (n < len)
        throw DataError("frame_signal: signal shorter than one window");

    FrameGrid grid;
    grid.frame_len_samples = len;
    grid.frame_shift_samples = shift;
    grid.n_frames = (n - len) / shift + 1;
    grid.sample_rate_hz = sample_rate_hz;

    const auto win = hamming_window(len);
    std::vector<std::vector<double>> frames;
    frames.reserve(static_cast<std::size_t>(grid.n_frames));
    for (int t = 0; t < grid.n_frames; ++t) {
        std::vector<double> f(static_cast<std::size_t>(len));
        const std::size_t off = static_cast<std::size_t>(t) * static_cast<std::size_t>(shift);
        for (int i = 0; i < len; ++i)
            f[static_cast<std::size_t>(i)] =
                samples[off + static_cast<std::size_t>(i)] * win[static_cast<std::size_t>(i)];
        frames.push_back(std::move(f));
    }
    return {grid, std::move(frames)};
}

// ---------------------------------------------------------------- FFT

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

void fft_pow2(std::vector<std::complex<double>>& buf, bool inverse) {
    const std::size_t n = buf.size();
    if (n == 0 || (n & (n - 1)) != 0)
        throw DataError("fft_pow2: length must be a power of two");
    // bit reversal
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(buf[i], buf[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? 2.0 : -2.0) * kPi / static_cast<double>(len);
        const std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const auto u = buf[i + k];
                const auto v = buf[i + k + len / 2] * w;
                buf[i + k] = u + v;
                buf[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
    if (inverse)
        for (auto& c : buf) c /= static_cast<double>(n);
}

std::vector<std::complex<double>> fft_any(const std::vector<std::complex<double>>& in,
                                          bool inverse) {
    const std::size_t n = in.size();
    if (n == 0) throw DataError("fft_any: empty input");
    if ((n & (n - 1)) == 0) {
        auto buf = in;
        fft_pow2(buf, inverse);
        return buf;
    }
    // Bluestein: x_k w^{k^2/2} convolved with chirp
    const std::size_t m = next_pow2(2 * n - 1);
    std::vector<std::complex<double>> chirp(n);
    for (std::size_t k = 0; k < n; ++k) {
        // k^2 mod 2n keeps the phase argument small
        const auto q = static_cast<double>((k * k) % (2 * n));
        const double ang = (inverse ? 1.0 : -1.0) * kPi * q / static_cast<double>(n);
        chirp[k] = {std::cos(ang), std::sin(ang)};
    }
    std::vector<std::complex<double>> a(m, {0.0, 0.0}), b(m, {0.0, 0.0});
    for (std::size_t k = 0; k < n; ++k) a[k] = in[k] * chirp[k];
    b[0] = std::conj(chirp[0]);
    for (std::size_t k = 1; k < n; ++k)
        b[k] = b[m - k] = std::conj(chirp[k]);
    fft_pow2(a, false);
    fft_pow2(b, false);
    for (std::size_t k = 0; k < m; ++k) a[k] *= b[k];
    fft_pow2(a, true);
    std::vector<std::complex<double>> out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = a[k] * chirp[k];
    if (inverse)
        for (auto& c : out) c /= static_cast<double>(n);
    return out;
}

std::vector<double> power_spectrum(const std::vector<double>& frame) {
    if (frame.empty()) throw DataError("power_spectrum: empty frame");
    const std::size_t l = next_pow2(frame.size());
    std::vector<std::complex<double>> buf(l, {0.0, 0.0});
    for (std::size_t i = 0; i < frame.size(); ++i) buf[i] = {frame[i], 0.0};
    fft_pow2(buf, false);
    std::vector<double> ps(l / 2 + 1);
    for (std::size_t k = 0; k <= l / 2; ++k) ps[k] = std::norm(buf[k]);
    return ps;
}

// ---------------------------------------------------------------- resampling

namespace {

double bessel_i0(double x) {
    // power series; converges fast for the beta range used here
    double sum = 1.0, term = 1.0;
    const double hx = 0.5 * x;
    for (int k = 1; k < 64; ++k) {
        term *= (hx / k) * (hx / k);
        sum += term;
        if (term < 1e-18 * sum) break;
    }
    return sum;
}

double sinc(double x) {
    if (std::abs(x) < 1e-12) return 1.0;
    return std::sin(kPi * x) / (kPi * x);
}

} // namespace

std::vector<double> resample(const std::vector<double>& samples,
                             int from_hz, int to_hz, double kaiser_beta) {
    if (from_hz <= 0 || to_hz <= 0)
        throw DataError("resample: sample rates must be positive");
    if (samples.empty()) throw DataError("resample: empty input");
    if (from_hz == to_hz) return samples;

    const int g = std::gcd(from_hz, to_hz);
    const double up = static_cast<double>(to_hz / g);
    const double down = static_cast<double>(from_hz / g);
    // anti-alias cutoff in cycles per input sample (Nyquist = 0.5)
    const double cutoff = 0.5 * std::min(1.0, up / down);
    const double half_width = 32.0 / std::min(1.0, up / down);
    const double i0_beta = bessel_i0(kaiser_beta);

    const auto n_in = static_cast<long long>(samples.size());
    const auto n_out = static_cast<long long>(
        std::llround(static_cast<double>(n_in) * to_hz / from_hz));
    std::vector<double> out(static_cast<std::size_t>(n_out));
    for (long long m = 0; m < n_out; ++m) {
        const double t = static_cast<double>(m) * down / up;
        const auto k0 = static_cast<long long>(std::ceil(t - half_width));
        const auto k1 = static_cast<long long>(std::floor(t + half_width));
        double acc = 0.0;
        for (long long k = std::max<long long>(k0, 0);
             k <= std::min<long long>(k1, n_in - 1); ++k) {
            const double d = t - static_cast<double>(k);
            const double u = d / half_width;
            const double win = bessel_i0(kaiser_beta * std::sqrt(std::max(0.0, 1.0 - u * u))) / i0_beta;
            acc += samples[static_cast<std::size_t>(k)] * 2.0 * cutoff * sinc(2.0 * cutoff * d) * win;
        }
        out[static_cast<std::size_t>(m)] = acc;
    }
    return out;
}

// ---------------------------------------------------------------- envelopes

std::vector<double> analytic_envelope(const std::vector<double>& samples) {
    if (samples.empty()) throw DataError("analytic_envelope: empty input");
    const std::size_t n = samples.size();
    std::vector<std::complex<double>> buf(n);
    for (std::size_t i = 0; i < n; ++i) buf[i] = {samples[i], 0.0};
    auto spec = fft_any(buf, false);
    // zero negative frequencies, double strictly positive ones
    for (std::size_t k = 1; k < n; ++k) {
        if (2 * k < n)
            spec[k] *= 2.0;
        else if (2 * k > n)
            spec[k] = {0.0, 0.0};
        // k == n/2 (even n): Nyquist bin kept as-is
    }
    auto analytic = fft_any(spec, true);
    std::vector<double> env(n);
    for (std::size_t i = 0; i < n; ++i) env[i] = std::abs(analytic[i]);
    return env;
}

namespace {

struct Biquad {
    double b0, b1, b2, a1, a2; // a0 normalized to 1
};

std::vector<Biquad> butter_lowpass_sections(double cutoff_hz, int sample_rate_hz,
                                            int order) {
    // bilinear transform of the analog Butterworth prototype
    const double c = 1.0 / std::tan(kPi * cutoff_hz / sample_rate_hz);
    std::vector<Biquad> sections;
    const int n_pairs = order / 2;
    for (int k = 0; k < n_pairs; ++k) {
        const double theta = kPi * (2.0 * k + order + 1.0) / (2.0 * order);
        const double re = std::cos(theta); // pole real part, negative
        const double a0 = c * c - 2.0 * re * c + 1.0;
        Biquad s;
        s.b0 = 1.0 / a0;
        s.b1 = 2.0 / a0;
        s.b2 = 1.0 / a0;
        s.a1 = 2.0 * (1.0 - c * c) / a0;
        s.a2 = (c * c + 2.0 * re * c + 1.0) / a0;
        sections.push_back(s);
    }
    if (order % 2 == 1) {
        Biquad s;
        s.b0 = 1.0 / (1.0 + c);
        s.b1 = 1.0 / (1.0 + c);
        s.b2 = 0.0;
        s.a1 = (1.0 - c) / (1.0 + c);
        s.a2 = 0.0;
        sections.push_back(s);
    }
    return sections;
}

// DF2-transposed filtering with steady-state initial conditions for a
// step of amplitude x0 (kills the startup transient on the padding).
void filter_sections(const std::vector<Biquad>& sections, std::vector<double>& x) {
    for (const auto& s : sections) {
        const double x0 = x.empty() ? 0.0 : x[0];
        double s1 = (s.b1 + s.b2 - s.a1 - s.a2) * x0;
        double s2 = (s.b2 - s.a2) * x0;
        for (double& v : x) {
            const double y = s.b0 * v + s1;
            s1 = s.b1 * v - s.a1 * y + s2;
            s2 = s.b2 * v - s.a2 * y;
            v = y;
        }
    }
}

} // namespace

std::vector<double> lowpass_zero_phase(const std::vector<double>& samples,
                                       int sample_rate_hz, double cutoff_hz,
                                       int order) {
    if (!(cutoff_hz > 0.0) || cutoff_hz >= sample_rate_hz / 2.0)
        throw DataError("lowpass_zero_phase: cutoff must lie in (0, Nyquist)");
    if (order < 1) throw DataError("lowpass_zero_phase: order must be >= 1");
    if (samples.empty()) return {};

    const auto n = static_cast<long long>(samples.size());
    // Padding long enough for the slowest pole's transient to decay below
    // ~1e-12: the most oscillatory Butterworth pole decays at roughly
    // omega_c * sin(pi / (2 * order)) per sample.
    const double omega_c = 2.0 * kPi * cutoff_hz / sample_rate_hz;
    const double decay = omega_c * std::sin(kPi / (2.0 * order));
    const long long padlen =
        std::min<long long>(n - 1, static_cast<long long>(std::ceil(40.0 / decay)));

    // odd reflection padding at both ends
    std::vector<double> ext;
    ext.reserve(static_cast<std::size_t>(n + 2 * padlen));
    for (long long i = padlen; i >= 1; --i)
        ext.push_back(2.0 * samples[0] - samples[static_cast<std::size_t>(i)]);
    ext.insert(ext.end(), samples.begin(), samples.end());
    for (long long i = 1; i <= padlen; ++i)
        ext.push_back(2.0 * samples[static_cast<std::size_t>(n - 1)] -
                      samples[static_cast<std::size_t>(n - 1 - i)]);

    const auto sections = butter_lowpass_sections(cutoff_hz, sample_rate_hz, order);
    filter_sections(sections, ext);
    std::reverse(ext.begin(), ext.end());
    filter_sections(sections, ext);
    std::reverse(ext.begin(), ext.end());

    return {ext.begin() + static_cast<std::ptrdiff_t>(padlen),
            ext.begin() + static_cast<std::ptrdiff_t>(padlen + n)};
}

// ---------------------------------------------------------------- wavelets

namespace {

// synthesis lowpass of the spline 3 / dual 9 biorthogonal pair; the
// analysis side of rbio3.9 uses the short spline filter as lowpass and
// the alternating-sign version of this one as highpass
const std::vector<double> kRbio39Long = {
    -0.00067974437278369901, 0.0020392331183510968,  0.0050603192196119811,
    -0.020618912641105536,   -0.014112787930175846,  0.09913478249423216,
    0.012300136269419315,    -0.32019196836077857,   0.0020500227115698858,
    0.94212570067820678,     0.94212570067820678,    0.0020500227115698858,
    -0.32019196836077857,    0.012300136269419315,   0.09913478249423216,
    -0.014112787930175846,   -0.020618912641105536,  0.0050603192196119811,
    0.0020392331183510968,   -0.00067974437278369901,
};

const std::vector<double> kDb4RecLo = {
    0.23037781330885523,   0.7148465705525415,   0.6308807679295904,
    -0.02798376941698385,  -0.18703481171888114, 0.030841381835986965,
    0.032883011666982945,  -0.010597401784997278,
};

WaveletFilters from_rec_lo(const std::vector<double>& rec_lo) {
    WaveletFilters f;
    f.lo.assign(rec_lo.rbegin(), rec_lo.rend());
    f.hi.resize(rec_lo.size());
    for (std::size_t i = 0; i < rec_lo.size(); ++i)
        f.hi[i] = (i % 2 == 0 ? 1.0 : -1.0) * rec_lo[i];
    return f;
}

WaveletFilters make_rbio39() {
    const double r = std::sqrt(2.0) / 8.0;
    WaveletFilters f;
    f.lo = {r, 3.0 * r, 3.0 * r, r};
    f.hi.resize(kRbio39Long.size());
    for (std::size_t i = 0; i < kRbio39Long.size(); ++i)
        f.hi[i] = (i % 2 == 0 ? 1.0 : -1.0) * kRbio39Long[i];
    return f;
}

std::size_t reflect_index(long long i, long long n) {
    // whole-sample symmetric reflection, repeated until in range
    while (i < 0 || i >= n) {
        if (i < 0) i = -i;
        if (i >= n) i = 2 * n - 2 - i;
    }
    return static_cast<std::size_t>(i);
}

std::vector<double> conv_down2(const std::vector<double>& x,
                               const std::vector<double>& f) {
    const auto n = static_cast<long long>(x.size());
    const auto l = static_cast<long long>(f.size());
    const long long n_out = (n + 1) / 2;
    std::vector<double> y(static_cast<std::size_t>(n_out));
    for (long long k = 0; k < n_out; ++k) {
        double acc = 0.0;
        for (long long j = 0; j < l; ++j)
            acc += f[static_cast<std::size_t>(j)] * x[reflect_index(2 * k + j, n)];
        y[static_cast<std::size_t>(k)] = acc;
    }
    return y;
}

} // namespace

const WaveletFilters& wavelet_filters(const std::string& wavelet_id) {
    static const std::map<std::string, WaveletFilters> table = [] {
        std::map<std::string, WaveletFilters> t;
        const double r = 1.0 / std::sqrt(2.0);
        t["haar"] = WaveletFilters{{r, r}, {r, -r}};
        t["db4"] = from_rec_lo(kDb4RecLo);
        t["rbio3.9"] = make_rbio39();
        return t;
    }();
    const auto it = table.find(wavelet_id);
    if (it == table.end())
        throw DataError("unknown wavelet: " + wavelet_id);
    return it->second;
}

std::vector<double> dwt_detail(const std::vector<double>& samples,
                               const std::string& wavelet_id, int level) {
    if (level < 1) throw DataError("dwt_detail: level must be >= 1");
    const auto& f = wavelet_filters(wavelet_id);
    if (samples.size() < (static_cast<std::size_t>(1) << level))
        throw DataError("dwt_detail: signal too short for requested level");
    std::vector<double> approx = samples;
    std::vector<double> detail;
    for (int l = 1; l <= level; ++l) {
        if (approx.size() < 2)
            throw DataError("dwt_detail: signal too short for requested level");
        detail = conv_down2(approx, f.hi);
        if (l < level) approx = conv_down2(approx, f.lo);
    }
    return detail;
}

} // namespace pcgseg::dsp
