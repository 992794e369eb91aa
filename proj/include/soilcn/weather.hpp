#ifndef SOILCN_WEATHER_HPP
#define SOILCN_WEATHER_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace soilcn {

struct DailyWeather {
    int day = 0;            // 0-based day index
    double precip = 0.0;    // [mm/day]
    double t_min = 0.0;     // [deg C]
    double t_max = 0.0;     // [deg C]
};

// Month-stratified Richardson-type generator state. Wet-day occurrence is a
// two-state Markov chain; wet-day amounts are gamma; temperatures are
// wet/dry-conditioned normals driven by a shared lag-1 standardized residual.
struct MonthParams {
    double p_wd = 0.0;  // P(wet | yesterday dry)
    double p_ww = 0.0;  // P(wet | yesterday wet)
    double gamma_shape = 1.0;
    double gamma_scale = 1.0;
    double tmax_mean[2] = {15.0, 15.0};  // [dry, wet]
    double tmax_sd[2] = {3.0, 3.0};
    double tmin_mean[2] = {5.0, 5.0};
    double tmin_sd[2] = {3.0, 3.0};
};

struct WeatherGenParams {
    std::array<MonthParams, 12> months{};
    double t_autocorr = 0.6;       // lag-1 autocorrelation of the residual
    double wet_threshold = 0.1;    // [mm] precipitation counting as a wet day
};

// Month (0..11) of a 0-based day-of-year in the generator's 365-day calendar.
int month_of_yday(int yday);

// Fits the generator to >= 2 full years of daily history. Months that never
// see a wet day fall back to the annual gamma fit.
WeatherGenParams fit_generator(const std::vector<DailyWeather>& history);

// Deterministic per seed.
std::vector<DailyWeather> generate(const WeatherGenParams& params, int years,
                                   uint64_t seed);

// Hargreaves-Samani reference evapotranspiration [mm/day] from the daily
// temperature range and extraterrestrial radiation.
double et0_hargreaves(double t_min_c, double t_max_c, double latitude_deg,
                      int day_of_year);

// Extraterrestrial radiation expressed as equivalent evaporation [mm/day].
double extraterrestrial_radiation(double latitude_deg, int day_of_year);

// ET_c = k_c * ET_0
double et_actual(const DailyWeather& day, double latitude_deg, int day_of_year,
                 double k_c);

// CSV exchange format: date,precip_mm,tmin_c,tmax_c with ISO dates.
std::vector<DailyWeather> read_weather_csv(const std::string& path);
void write_weather_csv(const std::string& path, const std::vector<DailyWeather>& days,
                       int start_year = 2000);

// Generator parameter (de)serialization, JSON.
std::string weather_params_to_json(const WeatherGenParams& p);
WeatherGenParams weather_params_from_json(const std::string& text);

}  // namespace soilcn

#endif
