#include <LocoManip/Errors.h>
#include <LocoManip/Scenario.h>

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace locomanip
{

namespace
{

std::string lineOf(const YAML::Node & node)
{
  const YAML::Mark mark = node.Mark();
  if(mark.is_null() || mark.line < 0)
  {
    return "";
  }
  return " (line " + std::to_string(mark.line + 1) + ")";
}

[[noreturn]] void fail(const std::string & path, const YAML::Node & node, const std::string & what)
{
  throw ConfigError(path + ": " + what + lineOf(node));
}

std::string join(const std::string & path, const std::string & key)
{
  return path.empty() ? key : path + "." + key;
}

template<typename T>
T scalarAs(const YAML::Node & node, const std::string & path, const char * type_name)
{
  if(!node.IsScalar())
  {
    fail(path, node, std::string("expected ") + type_name);
  }
  try
  {
    return node.as<T>();
  }
  catch(const YAML::Exception &)
  {
    fail(path, node, std::string("expected ") + type_name + ", got '" + node.Scalar() + "'");
  }
}

/** Typed access to the keys of one YAML mapping; keys never read are reported as unknown. */
class MapReader
{
public:
  MapReader(const YAML::Node & node, std::string path) : node_(node), path_(std::move(path))
  {
    if(!node_.IsMap())
    {
      fail(path_.empty() ? "<root>" : path_, node_, "expected a mapping");
    }
  }

  ~MapReader() = default;

  const std::string & path() const
  {
    return path_;
  }

  std::string field(const std::string & key) const
  {
    return join(path_, key);
  }

  bool has(const std::string & key)
  {
    known_.insert(key);
    return static_cast<bool>(node_[key]);
  }

  YAML::Node child(const std::string & key)
  {
    known_.insert(key);
    return node_[key];
  }

  void number(const std::string & key, double & out)
  {
    if(has(key))
    {
      out = scalarAs<double>(node_[key], field(key), "a number");
      if(!std::isfinite(out))
      {
        fail(field(key), node_[key], "must be finite");
      }
    }
  }

  void positive(const std::string & key, double & out)
  {
    number(key, out);
    if(!(out > 0.0))
    {
      fail(field(key), node_[key], "must be positive, got " + formatValue(out));
    }
  }

  void nonNegative(const std::string & key, double & out)
  {
    number(key, out);
    if(!(out >= 0.0))
    {
      fail(field(key), node_[key], "must be non-negative, got " + formatValue(out));
    }
  }

  /** Number that may be .inf (used for open-ended intervals). */
  void bound(const std::string & key, double & out)
  {
    if(has(key))
    {
      out = scalarAs<double>(node_[key], field(key), "a number");
      if(std::isnan(out))
      {
        fail(field(key), node_[key], "must not be NaN");
      }
    }
  }

  void boolean(const std::string & key, bool & out)
  {
    if(has(key))
    {
      out = scalarAs<bool>(node_[key], field(key), "true or false");
    }
  }

  void text(const std::string & key, std::string & out)
  {
    if(has(key))
    {
      out = scalarAs<std::string>(node_[key], field(key), "a string");
    }
  }

  void unsignedInt(const std::string & key, uint64_t & out)
  {
    if(has(key))
    {
      out = scalarAs<uint64_t>(node_[key], field(key), "a non-negative integer");
    }
  }

  template<int N>
  void vector(const std::string & key, Eigen::Matrix<double, N, 1> & out)
  {
    if(!has(key))
    {
      return;
    }
    const YAML::Node & seq = node_[key];
    if(!seq.IsSequence() || seq.size() != static_cast<size_t>(N))
    {
      fail(field(key), seq, "expected a list of " + std::to_string(N) + " numbers");
    }
    for(int i = 0; i < N; ++i)
    {
      out(i) = scalarAs<double>(seq[i], field(key) + "[" + std::to_string(i) + "]", "a number");
      if(!std::isfinite(out(i)))
      {
        fail(field(key), seq[i], "must be finite");
      }
    }
  }

  /** Reject keys that were never queried. */
  void finish() const
  {
    for(const auto & kv : node_)
    {
      const std::string key = kv.first.as<std::string>();
      if(!known_.count(key))
      {
        fail(join(path_, key), kv.first, "unknown key");
      }
    }
  }

  static std::string formatValue(double v)
  {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
  }

private:
  YAML::Node node_;
  std::string path_;
  std::set<std::string> known_;
};

YAML::Node sequenceAt(MapReader & reader, const std::string & key)
{
  YAML::Node seq = reader.child(key);
  if(seq && !seq.IsSequence())
  {
    fail(reader.field(key), seq, "expected a list");
  }
  return seq;
}

std::string indexed(const std::string & path, size_t i)
{
  return path + "." + std::to_string(i);
}

ExternalContact parseContact(const YAML::Node & node, const std::string & path)
{
  MapReader r(node, path);
  ExternalContact c;
  r.vector("position_m", c.position);
  r.vector("force_n", c.force);
  r.vector("moment_nm", c.moment);
  r.finish();
  return c;
}

void parseRobot(const YAML::Node & node, RobotParams & robot)
{
  MapReader r(node, "robot");
  r.positive("mass_kg", robot.mass);
  r.positive("gravity_mps2", robot.gravity);
  r.number("com_height_m", robot.com_height);
  r.number("zmp_height_m", robot.zmp_height);
  r.finish();
  if(!(robot.com_height > robot.zmp_height))
  {
    fail("robot.com_height_m", node["com_height_m"], "must be above robot.zmp_height_m");
  }
}

void parseStepping(const YAML::Node & node, SteppingConfig & stepping)
{
  MapReader r(node, "stepping");
  if(r.has("mode"))
  {
    std::string mode;
    r.text("mode", mode);
    if(mode == "in_place")
    {
      stepping.mode = SteppingConfig::Mode::InPlace;
    }
    else if(mode == "footsteps")
    {
      stepping.mode = SteppingConfig::Mode::Footsteps;
    }
    else
    {
      fail("stepping.mode", node["mode"], "expected in_place or footsteps, got '" + mode + "'");
    }
  }
  r.nonNegative("foot_spacing_m", stepping.foot_spacing);
  r.positive("single_support_s", stepping.single_support);
  r.nonNegative("double_support_s", stepping.double_support);
  r.nonNegative("double_support_fraction", stepping.double_support_fraction);
  if(stepping.double_support_fraction >= 1.0)
  {
    fail("stepping.double_support_fraction", node["double_support_fraction"], "must be below 1");
  }
  r.positive("sole_half_length_m", stepping.sole.half_extent.x());
  r.positive("sole_half_width_m", stepping.sole.half_extent.y());
  const YAML::Node steps = sequenceAt(r, "footsteps");
  if(steps)
  {
    stepping.footsteps.clear();
    for(size_t i = 0; i < steps.size(); ++i)
    {
      const std::string path = indexed("stepping.footsteps", i);
      MapReader s(steps[i], path);
      Footstep step;
      std::string foot = "left";
      s.text("foot", foot);
      if(foot == "left")
      {
        step.foot = Foot::Left;
      }
      else if(foot == "right")
      {
        step.foot = Foot::Right;
      }
      else
      {
        fail(path + ".foot", steps[i]["foot"], "expected left or right, got '" + foot + "'");
      }
      s.number("x_m", step.position.x());
      s.number("y_m", step.position.y());
      s.nonNegative("start_s", step.start_time);
      s.nonNegative("end_s", step.end_time);
      s.finish();
      if(!(step.end_time > step.start_time))
      {
        fail(path + ".end_s", steps[i]["end_s"], "must be after start_s");
      }
      stepping.footsteps.push_back(step);
    }
  }
  r.finish();
  if(stepping.mode == SteppingConfig::Mode::Footsteps && stepping.footsteps.empty())
  {
    fail("stepping.footsteps", node, "footsteps mode requires at least one footstep");
  }
}

void parseSchedule(const YAML::Node & seq, ContactSchedule & schedule)
{
  schedule.breakpoints.clear();
  for(size_t i = 0; i < seq.size(); ++i)
  {
    const std::string path = indexed("contacts", i);
    MapReader r(seq[i], path);
    ContactSchedule::Breakpoint bp;
    r.number("time_s", bp.time);
    if(r.has("interpolation"))
    {
      std::string mode;
      r.text("interpolation", mode);
      if(mode == "hold")
      {
        bp.mode = Interpolation::Hold;
      }
      else if(mode == "linear")
      {
        bp.mode = Interpolation::Linear;
      }
      else
      {
        fail(path + ".interpolation", seq[i]["interpolation"], "expected hold or linear, got '" + mode + "'");
      }
    }
    const YAML::Node contacts = sequenceAt(r, "contacts");
    if(contacts)
    {
      for(size_t j = 0; j < contacts.size(); ++j)
      {
        bp.contacts.push_back(parseContact(contacts[j], indexed(path + ".contacts", j)));
      }
    }
    r.finish();
    schedule.breakpoints.push_back(bp);
  }
  try
  {
    schedule.validate();
  }
  catch(const InvalidScheduleError & e)
  {
    fail("contacts", seq, e.what());
  }
}

void parseDisturbances(const YAML::Node & seq, std::vector<Disturbance> & disturbances)
{
  disturbances.clear();
  for(size_t i = 0; i < seq.size(); ++i)
  {
    const std::string path = indexed("disturbances", i);
    MapReader r(seq[i], path);
    Disturbance d;
    uint64_t contact = 0;
    r.unsignedInt("contact", contact);
    d.contact = static_cast<size_t>(contact);
    if(r.has("kind"))
    {
      std::string kind;
      r.text("kind", kind);
      if(kind == "constant")
      {
        d.kind = Disturbance::Kind::Constant;
      }
      else if(kind == "sinusoid")
      {
        d.kind = Disturbance::Kind::Sinusoid;
      }
      else if(kind == "step")
      {
        d.kind = Disturbance::Kind::Step;
      }
      else
      {
        fail(path + ".kind", seq[i]["kind"], "expected constant, sinusoid or step, got '" + kind + "'");
      }
    }
    r.vector("force_n", d.force);
    r.positive("period_s", d.period);
    r.number("start_s", d.start_time);
    r.bound("end_s", d.end_time);
    r.finish();
    if(!(d.end_time > d.start_time))
    {
      fail(path + ".end_s", seq[i]["end_s"], "must be after start_s");
    }
    disturbances.push_back(d);
  }
}

void parseController(const YAML::Node & node, ControllerConfig & controller)
{
  MapReader r(node, "controller");
  r.positive("dt_s", controller.dt);
  r.positive("preview_window_s", controller.preview_window);
  r.positive("q_zmp", controller.weights.q_zmp);
  r.positive("r_jerk", controller.weights.r_jerk);
  auto & st = controller.stabilizer;
  r.number("k_p", st.k_p);
  r.number("k_i", st.k_i);
  r.number("k_d", st.k_d);
  r.positive("rho_per_s", st.rho);
  r.positive("cutoff_period_s", st.cutoff_period);
  r.nonNegative("integrator_limit_m", st.integrator_limit);
  r.positive("derivative_filter_steps", st.derivative_filter_steps);
  r.finish();
  if(controller.preview_window < 1.0)
  {
    fail("controller.preview_window_s", node["preview_window_s"], "must be at least 1 s");
  }
}

void parsePlant(const YAML::Node & node, ScenarioConfig & config)
{
  MapReader r(node, "plant");
  r.positive("rho_per_s", config.plant.rho);
  r.boolean("direct_zmp", config.plant.direct_zmp);
  r.nonNegative("support_margin_m", config.plant.support_margin);
  r.positive("divergence_threshold_m", config.divergence_threshold);
  r.vector("initial_com_offset_m", config.initial_com_offset);
  r.nonNegative("com_noise_m", config.com_noise);
  r.nonNegative("force_noise_n", config.force_noise);
  r.finish();
}

void parseAblation(const YAML::Node & node, AblationConfig & ablation)
{
  MapReader r(node, "ablation");
  r.boolean("force_kappa_one", ablation.force_kappa_one);
  r.boolean("disable_gamma_compensation", ablation.disable_gamma_compensation);
  r.finish();
}

void parseMetrics(const YAML::Node & node, MetricsConfig & metrics)
{
  MapReader r(node, "metrics");
  if(r.has("window"))
  {
    const YAML::Node wnode = r.child("window");
    MapReader w(wnode, "metrics.window");
    w.number("start_s", metrics.window.start);
    w.bound("end_s", metrics.window.end);
    const YAML::Node ex = sequenceAt(w, "exclude_s");
    if(ex)
    {
      metrics.window.exclude.clear();
      for(size_t i = 0; i < ex.size(); ++i)
      {
        const std::string path = "metrics.window.exclude_s[" + std::to_string(i) + "]";
        if(!ex[i].IsSequence() || ex[i].size() != 2)
        {
          fail(path, ex[i], "expected [start, end]");
        }
        const double a = scalarAs<double>(ex[i][0], path, "a number");
        const double b = scalarAs<double>(ex[i][1], path, "a number");
        if(!(b > a))
        {
          fail(path, ex[i], "end must be after start");
        }
        metrics.window.exclude.emplace_back(a, b);
      }
    }
    w.finish();
  }
  const YAML::Node bands = sequenceAt(r, "bands");
  if(bands)
  {
    metrics.bands.clear();
    for(size_t i = 0; i < bands.size(); ++i)
    {
      const std::string path = indexed("metrics.bands", i);
      MapReader b(bands[i], path);
      MetricBand band;
      b.text("name", band.name);
      b.number("start_s", band.start);
      b.number("end_s", band.end);
      b.finish();
      if(band.name.empty())
      {
        fail(path + ".name", bands[i], "must not be empty");
      }
      if(!(band.end > band.start))
      {
        fail(path + ".end_s", bands[i]["end_s"], "must be after start_s");
      }
      metrics.bands.push_back(band);
    }
  }
  if(r.has("thresholds"))
  {
    const YAML::Node th = r.child("thresholds");
    if(!th.IsMap())
    {
      fail("metrics.thresholds", th, "expected a mapping of metric names");
    }
    metrics.thresholds.clear();
    for(const auto & kv : th)
    {
      MetricThreshold t;
      t.metric = kv.first.as<std::string>();
      const std::string path = "metrics.thresholds." + t.metric;
      MapReader m(kv.second, path);
      if(m.has("min"))
      {
        double v = 0.0;
        m.number("min", v);
        t.min = v;
      }
      if(m.has("max"))
      {
        double v = 0.0;
        m.number("max", v);
        t.max = v;
      }
      m.finish();
      if(!t.min && !t.max)
      {
        fail(path, kv.second, "needs min or max");
      }
      metrics.thresholds.push_back(t);
    }
  }
  r.finish();
}

void applyOverride(YAML::Node & root, const std::string & assignment)
{
  const auto eq = assignment.find('=');
  if(eq == std::string::npos || eq == 0)
  {
    throw ConfigError("override '" + assignment + "': expected key=value");
  }
  const std::string key = assignment.substr(0, eq);
  YAML::Node value;
  try
  {
    value = YAML::Load(assignment.substr(eq + 1));
  }
  catch(const YAML::Exception & e)
  {
    throw ConfigError("override '" + assignment + "': " + e.msg);
  }

  std::vector<std::string> parts;
  std::stringstream ss(key);
  std::string part;
  while(std::getline(ss, part, '.'))
  {
    if(part.empty())
    {
      throw ConfigError("override '" + assignment + "': empty path segment");
    }
    parts.push_back(part);
  }

  YAML::Node node = root;
  for(size_t i = 0; i < parts.size(); ++i)
  {
    const bool last = i + 1 == parts.size();
    YAML::Node next;
    if(node.IsSequence())
    {
      size_t idx = 0;
      try
      {
        idx = std::stoul(parts[i]);
      }
      catch(const std::exception &)
      {
        throw ConfigError("override '" + assignment + "': '" + parts[i] + "' is not a list index");
      }
      if(idx >= node.size())
      {
        throw ConfigError("override '" + assignment + "': index " + parts[i] + " out of range");
      }
      if(last)
      {
        node[idx] = value;
        return;
      }
      next = node[idx];
    }
    else
    {
      if(last)
      {
        node[parts[i]] = value;
        return;
      }
      next = node[parts[i]];
    }
    // Assigning a Node copies the value into the referenced node; reset rebinds the handle instead.
    node.reset(next);
  }
}

void emitVector(YAML::Emitter & out, const std::string & key, const Eigen::Ref<const Eigen::VectorXd> & v)
{
  out << YAML::Key << key << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for(Eigen::Index i = 0; i < v.size(); ++i)
  {
    out << v(i);
  }
  out << YAML::EndSeq;
}

const char * kindName(Disturbance::Kind kind)
{
  switch(kind)
  {
    case Disturbance::Kind::Sinusoid:
      return "sinusoid";
    case Disturbance::Kind::Step:
      return "step";
    case Disturbance::Kind::Constant:
    default:
      return "constant";
  }
}

} // namespace

ScenarioConfig parseScenario(const std::string & yaml_text, const std::vector<std::string> & overrides)
{
  YAML::Node root;
  try
  {
    root = YAML::Load(yaml_text);
  }
  catch(const YAML::ParserException & e)
  {
    throw ConfigError("malformed YAML (line " + std::to_string(e.mark.line + 1) + "): " + e.msg);
  }
  if(!root || root.IsNull())
  {
    root = YAML::Node(YAML::NodeType::Map);
  }
  for(const auto & o : overrides)
  {
    applyOverride(root, o);
  }

  ScenarioConfig config;
  MapReader r(root, "");
  r.text("name", config.name);
  r.positive("duration_s", config.duration);
  r.unsignedInt("seed", config.seed);
  if(r.has("robot"))
  {
    parseRobot(r.child("robot"), config.robot);
  }
  if(r.has("stepping"))
  {
    parseStepping(r.child("stepping"), config.stepping);
  }
  if(const YAML::Node contacts = sequenceAt(r, "contacts"))
  {
    parseSchedule(contacts, config.contacts);
  }
  if(const YAML::Node dist = sequenceAt(r, "disturbances"))
  {
    parseDisturbances(dist, config.disturbances);
  }
  if(r.has("controller"))
  {
    parseController(r.child("controller"), config.controller);
  }
  if(r.has("plant"))
  {
    parsePlant(r.child("plant"), config);
  }
  if(r.has("ablation"))
  {
    parseAblation(r.child("ablation"), config.ablation);
  }
  if(r.has("metrics"))
  {
    parseMetrics(r.child("metrics"), config.metrics);
  }
  if(r.has("output"))
  {
    MapReader o(r.child("output"), "output");
    o.text("directory", config.output_directory);
    o.finish();
  }
  r.finish();

  config.plant.dt = config.controller.dt;
  if(config.name.empty())
  {
    throw ConfigError("name: must not be empty");
  }
  for(size_t i = 0; i < config.disturbances.size(); ++i)
  {
    const size_t n_contacts = config.contacts.breakpoints.empty() ? 0 : config.contacts.breakpoints.front().contacts.size();
    if(config.disturbances[i].contact >= n_contacts)
    {
      throw ConfigError(indexed("disturbances", i) + ".contact: no desired contact with index "
                        + std::to_string(config.disturbances[i].contact));
    }
  }
  return config;
}

ScenarioConfig loadScenario(const std::string & path, const std::vector<std::string> & overrides)
{
  std::ifstream in(path);
  if(!in)
  {
    throw ConfigError(path + ": cannot open scenario file");
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  try
  {
    return parseScenario(buffer.str(), overrides);
  }
  catch(const ConfigError & e)
  {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string toYaml(const ScenarioConfig & c)
{
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "name" << YAML::Value << YAML::DoubleQuoted << c.name;
  out << YAML::Key << "duration_s" << YAML::Value << c.duration;
  out << YAML::Key << "seed" << YAML::Value << c.seed;

  out << YAML::Key << "robot" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "mass_kg" << YAML::Value << c.robot.mass;
  out << YAML::Key << "gravity_mps2" << YAML::Value << c.robot.gravity;
  out << YAML::Key << "com_height_m" << YAML::Value << c.robot.com_height;
  out << YAML::Key << "zmp_height_m" << YAML::Value << c.robot.zmp_height;
  out << YAML::EndMap;

  const auto & s = c.stepping;
  out << YAML::Key << "stepping" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "mode" << YAML::Value
      << (s.mode == SteppingConfig::Mode::InPlace ? "in_place" : "footsteps");
  out << YAML::Key << "foot_spacing_m" << YAML::Value << s.foot_spacing;
  out << YAML::Key << "single_support_s" << YAML::Value << s.single_support;
  out << YAML::Key << "double_support_s" << YAML::Value << s.double_support;
  out << YAML::Key << "double_support_fraction" << YAML::Value << s.double_support_fraction;
  out << YAML::Key << "sole_half_length_m" << YAML::Value << s.sole.half_extent.x();
  out << YAML::Key << "sole_half_width_m" << YAML::Value << s.sole.half_extent.y();
  out << YAML::Key << "footsteps" << YAML::Value << YAML::BeginSeq;
  for(const auto & f : s.footsteps)
  {
    out << YAML::Flow << YAML::BeginMap;
    out << YAML::Key << "foot" << YAML::Value << (f.foot == Foot::Left ? "left" : "right");
    out << YAML::Key << "x_m" << YAML::Value << f.position.x();
    out << YAML::Key << "y_m" << YAML::Value << f.position.y();
    out << YAML::Key << "start_s" << YAML::Value << f.start_time;
    out << YAML::Key << "end_s" << YAML::Value << f.end_time;
    out << YAML::EndMap;
  }
  out << YAML::EndSeq << YAML::EndMap;

  out << YAML::Key << "contacts" << YAML::Value << YAML::BeginSeq;
  for(const auto & bp : c.contacts.breakpoints)
  {
    out << YAML::BeginMap;
    out << YAML::Key << "time_s" << YAML::Value << bp.time;
    out << YAML::Key << "interpolation" << YAML::Value << (bp.mode == Interpolation::Linear ? "linear" : "hold");
    out << YAML::Key << "contacts" << YAML::Value << YAML::BeginSeq;
    for(const auto & contact : bp.contacts)
    {
      out << YAML::BeginMap;
      emitVector(out, "position_m", contact.position);
      emitVector(out, "force_n", contact.force);
      emitVector(out, "moment_nm", contact.moment);
      out << YAML::EndMap;
    }
    out << YAML::EndSeq << YAML::EndMap;
  }
  out << YAML::EndSeq;

  out << YAML::Key << "disturbances" << YAML::Value << YAML::BeginSeq;
  for(const auto & d : c.disturbances)
  {
    out << YAML::BeginMap;
    out << YAML::Key << "contact" << YAML::Value << static_cast<uint64_t>(d.contact);
    out << YAML::Key << "kind" << YAML::Value << kindName(d.kind);
    emitVector(out, "force_n", d.force);
    out << YAML::Key << "period_s" << YAML::Value << d.period;
    out << YAML::Key << "start_s" << YAML::Value << d.start_time;
    if(std::isfinite(d.end_time))
    {
      out << YAML::Key << "end_s" << YAML::Value << d.end_time;
    }
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;

  const auto & ctl = c.controller;
  out << YAML::Key << "controller" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "dt_s" << YAML::Value << ctl.dt;
  out << YAML::Key << "preview_window_s" << YAML::Value << ctl.preview_window;
  out << YAML::Key << "q_zmp" << YAML::Value << ctl.weights.q_zmp;
  out << YAML::Key << "r_jerk" << YAML::Value << ctl.weights.r_jerk;
  out << YAML::Key << "k_p" << YAML::Value << ctl.stabilizer.k_p;
  out << YAML::Key << "k_i" << YAML::Value << ctl.stabilizer.k_i;
  out << YAML::Key << "k_d" << YAML::Value << ctl.stabilizer.k_d;
  out << YAML::Key << "rho_per_s" << YAML::Value << ctl.stabilizer.rho;
  out << YAML::Key << "cutoff_period_s" << YAML::Value << ctl.stabilizer.cutoff_period;
  out << YAML::Key << "integrator_limit_m" << YAML::Value << ctl.stabilizer.integrator_limit;
  out << YAML::Key << "derivative_filter_steps" << YAML::Value << ctl.stabilizer.derivative_filter_steps;
  out << YAML::EndMap;

  out << YAML::Key << "plant" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "rho_per_s" << YAML::Value << c.plant.rho;
  out << YAML::Key << "direct_zmp" << YAML::Value << c.plant.direct_zmp;
  out << YAML::Key << "support_margin_m" << YAML::Value << c.plant.support_margin;
  out << YAML::Key << "divergence_threshold_m" << YAML::Value << c.divergence_threshold;
  emitVector(out, "initial_com_offset_m", c.initial_com_offset);
  out << YAML::Key << "com_noise_m" << YAML::Value << c.com_noise;
  out << YAML::Key << "force_noise_n" << YAML::Value << c.force_noise;
  out << YAML::EndMap;

  out << YAML::Key << "ablation" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "force_kappa_one" << YAML::Value << c.ablation.force_kappa_one;
  out << YAML::Key << "disable_gamma_compensation" << YAML::Value << c.ablation.disable_gamma_compensation;
  out << YAML::EndMap;

  const auto & m = c.metrics;
  out << YAML::Key << "metrics" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "window" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "start_s" << YAML::Value << m.window.start;
  if(std::isfinite(m.window.end))
  {
    out << YAML::Key << "end_s" << YAML::Value << m.window.end;
  }
  out << YAML::Key << "exclude_s" << YAML::Value << YAML::BeginSeq;
  for(const auto & [a, b] : m.window.exclude)
  {
    out << YAML::Flow << YAML::BeginSeq << a << b << YAML::EndSeq;
  }
  out << YAML::EndSeq << YAML::EndMap;
  out << YAML::Key << "bands" << YAML::Value << YAML::BeginSeq;
  for(const auto & band : m.bands)
  {
    out << YAML::Flow << YAML::BeginMap;
    out << YAML::Key << "name" << YAML::Value << YAML::DoubleQuoted << band.name;
    out << YAML::Key << "start_s" << YAML::Value << band.start;
    out << YAML::Key << "end_s" << YAML::Value << band.end;
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
  out << YAML::Key << "thresholds" << YAML::Value << YAML::BeginMap;
  for(const auto & t : m.thresholds)
  {
    out << YAML::Key << t.metric << YAML::Value << YAML::Flow << YAML::BeginMap;
    if(t.min)
    {
      out << YAML::Key << "min" << YAML::Value << *t.min;
    }
    if(t.max)
    {
      out << YAML::Key << "max" << YAML::Value << *t.max;
    }
    out << YAML::EndMap;
  }
  out << YAML::EndMap << YAML::EndMap;

  out << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "directory" << YAML::Value << YAML::DoubleQuoted << c.output_directory;
  out << YAML::EndMap;

  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

bool ScenarioResult::allChecksPass() const
{
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult & c) { return c.pass; });
}

ScenarioResult runScenario(const ScenarioConfig & config)
{
  const RobotParams & params = config.robot;
  params.validate();
  const double dt = config.controller.dt;
  const double omega = naturalFrequency(params);
  validateGains(config.controller.stabilizer, omega);

  ScenarioResult result;
  result.name = config.name;
  result.gains = synthesizeGains(config.controller.weights, omega, dt, config.controller.preview_window);

  const size_t n_samples = static_cast<size_t>(std::llround(config.duration / dt)) + 1;
  const double horizon = static_cast<double>(n_samples - 1 + result.gains.n_horizon) * dt;
  const auto & stepping = config.stepping;
  std::vector<Footstep> steps = stepping.footsteps;
  if(stepping.mode == SteppingConfig::Mode::InPlace)
  {
    steps = inPlaceStepping(stepping.foot_spacing, stepping.single_support, stepping.double_support,
                            horizon + stepping.single_support + stepping.double_support);
  }
  const auto zmp = buildZmpReference(steps, stepping.double_support_fraction, dt, horizon, stepping.sole);
  auto frames = buildReferenceFrames(zmp, config.contacts, params);
  if(config.ablation.force_kappa_one)
  {
    forceUnitKappa(frames);
  }
  result.desired = generateTrajectory(frames, result.gains, restingState(frames.front()));

  ClosedLoopOptions options;
  options.plant = config.plant;
  options.plant.dt = dt;
  options.compensate_gamma = !config.ablation.disable_gamma_compensation;
  options.divergence_threshold = config.divergence_threshold;
  options.initial_com_offset = config.initial_com_offset;
  options.com_noise = config.com_noise;
  options.force_noise = config.force_noise;
  options.seed = config.seed;
  result.trace = runClosedLoop(result.desired, params, config.controller.stabilizer, config.disturbances, options);

  result.metrics = traceMetrics(result.trace, config.metrics.window, config.metrics.bands);

  // ZMP the true contacts would need to realize the planned CoM, against the footstep reference.
  double sum_sq = 0.0;
  size_t n = 0;
  for(const auto & d : result.desired)
  {
    if(!config.metrics.window.contains(d.time))
    {
      continue;
    }
    const auto truth = applyDisturbances(d.contacts, config.disturbances, d.time);
    const auto coeff = computeCoefficients(params, truth);
    const Eigen::Vector2d ext = d.com.pos - d.com.acc / (coeff.omega * coeff.omega);
    sum_sq += (zmpFromExtZmp(coeff, ext) - d.zmp_ref).squaredNorm();
    ++n;
  }
  result.metrics["rms_implied_zmp_dev"] = n ? std::sqrt(sum_sq / static_cast<double>(n)) : 0.0;

  for(const auto & t : config.metrics.thresholds)
  {
    const auto it = result.metrics.find(t.metric);
    if(it == result.metrics.end())
    {
      throw ConfigError("metrics.thresholds." + t.metric + ": unknown metric");
    }
    CheckResult check{t, it->second, true};
    if(t.min && !(check.value >= *t.min))
    {
      check.pass = false;
    }
    if(t.max && !(check.value <= *t.max))
    {
      check.pass = false;
    }
    result.checks.push_back(check);
  }
  return result;
}

void writeScenarioMetrics(const ScenarioResult & result, std::ostream & os)
{
  writeMetrics(result.metrics, os);
  for(const auto & c : result.checks)
  {
    os << "check." << c.threshold.metric << '=' << (c.pass ? "pass" : "fail") << '\n';
  }
  os << "checks=" << (result.allChecksPass() ? "pass" : "fail") << '\n';
}

void writeScenarioOutputs(const ScenarioResult & result, const std::string & directory)
{
  namespace fs = std::filesystem;
  fs::create_directories(directory);
  const fs::path base = fs::path(directory) / result.name;
  {
    std::ofstream csv(base.string() + ".csv");
    if(!csv)
    {
      throw std::runtime_error("cannot write " + base.string() + ".csv");
    }
    writeTraceCsv(result.trace, csv);
  }
  std::ofstream metrics(base.string() + ".metrics");
  if(!metrics)
  {
    throw std::runtime_error("cannot write " + base.string() + ".metrics");
  }
  writeScenarioMetrics(result, metrics);
}

} // namespace locomanip
