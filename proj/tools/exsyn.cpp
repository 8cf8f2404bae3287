#include <exsyn/exsyn.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace exsyn;
using json = nlohmann::ordered_json;

namespace
{

enum exit_code : int
{
  ok = 0,
  negative = 1,
  usage = 2,
  timeout = 3
};

struct usage_error : std::runtime_error
{
  using std::runtime_error::runtime_error;
};

struct common_options
{
  uint64_t seed{0};
  double budget{0.0};
  uint64_t conflicts{0};
  bool deterministic{true};
  uint32_t jobs{1};
  std::string solver;
  std::string manifest;
};

std::string fnv1a( std::string const& s )
{
  uint64_t h = 0xcbf29ce484222325ull;
  for ( unsigned char c : s )
  {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  std::ostringstream os;
  os << std::hex << std::setw( 16 ) << std::setfill( '0' ) << h;
  return os.str();
}

std::string read_text( std::string const& path )
{
  std::ifstream in( path, std::ios::binary );
  if ( !in )
    throw usage_error( "cannot read " + path );
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text( fs::path const& path, std::string const& text )
{
  if ( path.has_parent_path() )
    fs::create_directories( path.parent_path() );
  std::ofstream out( path, std::ios::binary );
  if ( !out )
    throw std::runtime_error( "cannot write " + path.string() );
  out << text;
}

std::vector<std::string> split( std::string const& s, char sep )
{
  std::vector<std::string> r;
  std::string cur;
  std::istringstream in( s );
  while ( std::getline( in, cur, sep ) )
    r.push_back( cur );
  return r;
}

uint32_t parse_uint( std::string const& s, std::string const& what )
{
  try
  {
    size_t used = 0;
    auto const v = std::stoul( s, &used );
    if ( used != s.size() )
      throw std::invalid_argument( s );
    return static_cast<uint32_t>( v );
  }
  catch ( std::exception const& )
  {
    throw usage_error( "invalid " + what + " '" + s + "'" );
  }
}

/* "3", "1..4", "1,3,7" */
std::vector<uint32_t> parse_range( std::string const& s )
{
  std::vector<uint32_t> r;
  for ( auto const& part : split( s, ',' ) )
  {
    auto const dots = part.find( ".." );
    if ( dots == std::string::npos )
    {
      r.push_back( parse_uint( part, "size" ) );
      continue;
    }
    auto const lo = parse_uint( part.substr( 0, dots ), "range" );
    auto const hi = parse_uint( part.substr( dots + 2 ), "range" );
    if ( lo > hi )
      throw usage_error( "empty range '" + part + "'" );
    for ( auto n = lo; n <= hi; ++n )
      r.push_back( n );
  }
  if ( r.empty() )
    throw usage_error( "empty range" );
  return r;
}

struct requirement
{
  circuit c;
  std::string family;
  std::string n;
};

/* a BENCH path, family:n, sort:n, or tt:HEX[,HEX...]:inputs */
requirement load_requirement( std::string const& spec )
{
  requirement r;
  if ( fs::exists( spec ) )
  {
    r.c = read_bench_file( spec );
    r.family = fs::path( spec ).stem().string();
    r.n = "-";
    return r;
  }
  auto const parts = split( spec, ':' );
  if ( parts.size() == 3 && parts[0] == "tt" )
  {
    r.c = truth_table_requirement( split( parts[1], ',' ), parse_uint( parts[2], "input count" ) );
    r.family = "tt";
    r.n = parts[1];
    return r;
  }
  if ( parts.size() == 2 && parts[0] == "sort" )
  {
    r.c = gen_bitonic_sorter( parse_uint( parts[1], "size" ) );
    r.family = "sort";
    r.n = parts[1];
    return r;
  }
  if ( parts.size() == 2 )
  {
    family_spec fsp{parts[0], parse_uint( parts[1], "size" )};
    if ( auto e = family_error( fsp ); !e.empty() )
      throw usage_error( e );
    r.c = gen_alu( fsp );
    r.family = parts[0];
    r.n = parts[1];
    return r;
  }
  throw usage_error( "requirement '" + spec + "' is not a file, family:n, sort:n, or tt:HEX:m" );
}

std::vector<std::optional<bool>> parse_ancilla_values( std::string const& s )
{
  std::vector<std::optional<bool>> r;
  if ( s.empty() )
    return r;
  for ( auto const& v : split( s, ',' ) )
  {
    if ( v == "0" )
      r.push_back( false );
    else if ( v == "1" )
      r.push_back( true );
    else if ( v == "free" || v == "x" )
      r.push_back( std::nullopt );
    else
      throw usage_error( "ancilla value must be 0, 1 or free, got '" + v + "'" );
  }
  return r;
}

sat_budget budget_of( common_options const& o )
{
  sat_budget b;
  if ( o.budget > 0.0 )
    b.seconds = o.budget;
  if ( o.conflicts > 0u )
    b.conflicts = o.conflicts;
  return b;
}

std::string solver_command( common_options const& o )
{
  if ( !o.solver.empty() )
    return o.solver == "embedded" ? std::string{} : o.solver;
  if ( auto const* env = std::getenv( external_solver_env ) )
    return env;
  return {};
}

solve_options solve_options_of( common_options const& o )
{
  solve_options so;
  so.budget = budget_of( o );
  so.seed = o.seed;
  so.external_solver = solver_command( o );
  return so;
}

json common_json( common_options const& o )
{
  json j;
  j["seed"] = o.seed;
  j["budget_seconds"] = o.budget;
  j["budget_conflicts"] = o.conflicts;
  j["deterministic"] = o.deterministic;
  j["jobs"] = o.jobs;
  j["solver"] = solver_command( o ).empty() ? "embedded" : solver_command( o );
  return j;
}

void emit_manifest( common_options const& o, fs::path const& fallback, json const& j )
{
  fs::path const p = o.manifest.empty() ? fallback : fs::path( o.manifest );
  if ( p.empty() )
    return;
  write_text( p, j.dump( 2 ) + "\n" );
}

json input_json( std::string const& spec, circuit const& c )
{
  return json{{"requirement", spec}, {"digest", fnv1a( serialize_bench( c ) )}};
}

std::string vector_text( circuit const& c, std::vector<bool> const& v )
{
  std::string s;
  auto const names = c.input_names();
  for ( auto i = 0u; i < v.size(); ++i )
    s += ( i ? " " : "" ) + names[i] + "=" + ( v[i] ? "1" : "0" );
  return s;
}

/* ---------------------------------------------------------------------- */

int cmd_bench_gen( common_options const& o, std::string const& family, std::string const& range, std::string const& out_dir )
{
  json arts = json::array();
  for ( auto n : parse_range( range ) )
  {
    family_spec fsp{family, n};
    if ( auto e = family_error( fsp ); !e.empty() )
      throw usage_error( e );
    auto const c = gen_alu( fsp );
    auto const text = serialize_bench( c );
    auto const rel = fs::path( family ) / ( std::to_string( n ) + ".bench" );
    write_text( fs::path( out_dir ) / rel, text );
    std::cout << "file=" << rel.string() << " inputs=" << c.num_inputs() << " outputs=" << c.num_outputs()
              << " gates=" << c.num_gates() << "\n";
    arts.push_back( {{"path", rel.string()},
                     {"n", n},
                     {"inputs", c.num_inputs()},
                     {"outputs", c.num_outputs()},
                     {"gates", c.num_gates()},
                     {"digest", fnv1a( text )}} );
  }
  json m;
  m["command"] = "bench-gen";
  m["config"] = common_json( o );
  m["config"]["family"] = family;
  m["config"]["range"] = range;
  m["artifacts"] = arts;
  emit_manifest( o, fs::path( out_dir ) / ( family + ".manifest.json" ), m );
  return ok;
}

int cmd_label_count( common_options const& o, std::string const& spec, std::string const& basis_name, uint64_t limit )
{
  auto const req = load_requirement( spec );
  auto const b = basis_by_name_or_path( basis_name );
  auto const enc = create_miter( b, topology_of( req.c ), req.c );
  auto const e = enumerate_solutions( enc, req.c, limit, solve_options_of( o ) );
  bool const partial = !e.complete;
  std::cout << "count=" << e.circuits.size() << "\n"
            << "complete=" << ( e.complete ? 1 : 0 ) << "\n"
            << "partial=" << ( partial ? 1 : 0 ) << "\n"
            << "timed_out=" << ( e.timed_out ? 1 : 0 ) << "\n"
            << "conflicts=" << e.stats.conflicts << "\n";
  if ( !o.deterministic )
    std::cout << "seconds=" << e.seconds << "\n";
  json m;
  m["command"] = "label-count";
  m["config"] = common_json( o );
  m["config"]["basis"] = basis_name;
  m["config"]["limit"] = limit;
  m["inputs"] = json::array( {input_json( spec, req.c )} );
  m["count"] = e.circuits.size();
  m["complete"] = e.complete;
  m["timed_out"] = e.timed_out;
  m["conflicts"] = e.stats.conflicts;
  emit_manifest( o, {}, m );
  if ( e.timed_out )
    return timeout;
  return e.circuits.empty() ? negative : ok;
}

struct synth_args
{
  std::string basis{"standard"};
  std::string mode{"circuit"};
  uint32_t min_k{1};
  uint32_t max_k{0};
  bool symmetry{true};
  bool strict{false};
  uint64_t enumerate{0};
  std::string ancillae{"0"};
  std::string ancilla_values;
  bool all_sizes{false};
  std::string out_dir{"."};
};

int cmd_synthesize( common_options const& o, std::string const& spec, synth_args const& a )
{
  auto const req = load_requirement( spec );
  synthesis_config cfg;
  cfg.b = basis_by_name_or_path( a.basis );
  try
  {
    cfg.mode = parse_topology_mode( a.mode );
  }
  catch ( std::invalid_argument const& e )
  {
    throw usage_error( e.what() );
  }
  cfg.symmetry_breaking = a.symmetry;
  cfg.strict_symmetry = a.strict;
  cfg.min_components = a.min_k;
  cfg.max_components = a.max_k;
  cfg.per_size = budget_of( o );
  cfg.enumerate = a.enumerate > 0u;
  cfg.enumeration_limit = std::max<uint64_t>( a.enumerate, 1u );
  cfg.stop_at_first = !a.all_sizes;
  cfg.ancilla_counts = parse_range( a.ancillae );
  cfg.ancilla_values = parse_ancilla_values( a.ancilla_values );
  cfg.jobs = o.jobs;
  cfg.seed = o.seed;
  cfg.external_solver = solver_command( o );

  auto res = synthesize( cfg, req.c );
  if ( o.deterministic )
    for ( auto& r : res.bounds.rows )
      r.seconds = 0.0;

  fs::path const out( a.out_dir );
  write_text( out / "bounds.csv", res.bounds.to_csv( req.family, req.n ) );
  json arts = json::array();
  bool all_verified = true;
  for ( auto i = 0u; i < res.circuits.size(); ++i )
  {
    auto const& c = res.circuits[i];
    /* ancillae are constant gates inside the emitted netlist */
    bool const verified = verify( c, req.c ).equivalent;
    all_verified &= verified;
    auto const text = serialize_bench( c );
    auto const rel = "solution_" + std::to_string( i ) + ".bench";
    write_text( out / rel, text );
    arts.push_back( {{"path", rel},
                     {"gates", c.num_gates() - res.circuit_ancillae[i]},
                     {"ancillae", res.circuit_ancillae[i]},
                     {"histogram", c.gate_histogram()},
                     {"digest", fnv1a( text )},
                     {"verified", verified}} );
  }
  bool any_timeout = false;
  json rows = json::array();
  for ( auto const& r : res.bounds.rows )
  {
    any_timeout |= r.status == sat_status::unknown;
    std::cout << "ancillae=" << r.ancillae << " k=" << r.k << " status=" << status_word( r.status ) << " solutions=" << r.solutions
              << " conflicts=" << r.conflicts;
    if ( !o.deterministic )
      std::cout << " seconds=" << r.seconds;
    std::cout << "\n";
    rows.push_back( {{"ancillae", r.ancillae},
                     {"k", r.k},
                     {"status", status_word( r.status )},
                     {"gates", r.gates},
                     {"solutions", r.solutions},
                     {"conflicts", r.conflicts},
                     {"seconds", r.seconds}} );
  }
  auto const up = res.bounds.upper();
  auto const lo = res.bounds.lower();
  std::cout << "upper=" << ( up ? std::to_string( *up ) : "none" ) << "\n"
            << "lower=" << ( lo ? std::to_string( *lo ) : "none" ) << "\n"
            << "optimal=" << ( res.bounds.optimal() ? 1 : 0 ) << "\n"
            << "circuits=" << res.circuits.size() << "\n";

  json m;
  m["command"] = "synthesize";
  auto cj = common_json( o );
  cj["basis"] = a.basis;
  cj["mode"] = a.mode;
  cj["min_k"] = a.min_k;
  cj["max_k"] = a.max_k;
  cj["symmetry"] = a.symmetry;
  cj["strict_symmetry"] = a.strict;
  cj["enumerate"] = a.enumerate;
  cj["ancillae"] = a.ancillae;
  cj["ancilla_values"] = a.ancilla_values;
  m["config"] = cj;
  m["inputs"] = json::array( {input_json( spec, req.c )} );
  m["rows"] = rows;
  m["bounds"] = {{"upper", up ? json( *up ) : json()}, {"lower", lo ? json( *lo ) : json()}, {"optimal", res.bounds.optimal()}};
  m["artifacts"] = arts;
  m["csv"] = "bounds.csv";
  emit_manifest( o, out / "manifest.json", m );

  if ( !all_verified )
    throw std::logic_error( "an emitted circuit failed verification" );
  if ( !res.circuits.empty() )
    return ok;
  return any_timeout ? timeout : negative;
}

int cmd_verify( common_options const& o, std::string const& a_spec, std::string const& b_spec )
{
  auto const a = load_requirement( a_spec );
  auto const b = load_requirement( b_spec );
  verify_result r;
  try
  {
    r = verify( a.c, b.c );
  }
  catch ( interface_error const& e )
  {
    std::cerr << "error: " << e.what() << "\n";
    return usage;
  }
  std::cout << "equivalent=" << ( r.equivalent ? 1 : 0 ) << "\n"
            << "method=" << r.method << "\n"
            << "pairing=" << ( r.by_name ? "name" : "position" ) << "\n";
  if ( r.counterexample )
  {
    std::cout << "counterexample=" << vector_text( a.c, *r.counterexample ) << "\n";
    auto const ya = evaluate( a.c, *r.counterexample );
    std::cout << "outputs_a=";
    for ( bool v : ya )
      std::cout << v;
    std::cout << "\n";
  }
  json m;
  m["command"] = "verify";
  m["config"] = common_json( o );
  m["inputs"] = json::array( {input_json( a_spec, a.c ), input_json( b_spec, b.c )} );
  m["equivalent"] = r.equivalent;
  emit_manifest( o, {}, m );
  return r.equivalent ? ok : negative;
}

int cmd_export( common_options const& o, std::string const& spec, synth_args const& a, uint32_t k, std::string const& format,
                std::string const& out_path )
{
  if ( format != "qdimacs" && format != "dimacs-expanded" )
    throw usage_error( "unknown format '" + format + "' (qdimacs or dimacs-expanded)" );
  auto const req = load_requirement( spec );
  synthesis_encoding_options eo;
  try
  {
    eo.mode = parse_topology_mode( a.mode );
  }
  catch ( std::invalid_argument const& e )
  {
    throw usage_error( e.what() );
  }
  eo.symmetry_breaking = a.symmetry;
  eo.strict_symmetry = a.strict;
  eo.ancillae = parse_uint( a.ancillae, "ancilla count" );
  eo.ancilla_values = parse_ancilla_values( a.ancilla_values );
  auto const enc = build_synthesis_encoding( basis_by_name_or_path( a.basis ), req.c, k, eo );
  std::string text;
  if ( format == "qdimacs" )
    text = to_qdimacs( enc.q );
  else
  {
    auto const ex = expand_universal( enc.q );
    text = "c copies " + std::to_string( ex.copies ) + "\nc selector variables 1.." + std::to_string( ex.s_vars.size() ) + "\n" +
           to_dimacs( ex.formula );
  }
  if ( out_path.empty() || out_path == "-" )
    std::cout << text;
  else
    write_text( out_path, text );
  json m;
  m["command"] = "export";
  m["config"] = common_json( o );
  m["config"]["format"] = format;
  m["config"]["k"] = k;
  m["inputs"] = json::array( {input_json( spec, req.c )} );
  m["digest"] = fnv1a( text );
  emit_manifest( o, {}, m );
  return ok;
}

int cmd_sat( common_options const& o, std::string const& path )
{
  auto const q = parse_qdimacs( read_text( path ) );
  auto const r = solve_sat( q.formula, budget_of( o ), o.seed );
  std::cout << format_sat_output( r, q.formula.num_vars );
  return r.status == sat_status::sat ? ok : r.status == sat_status::unsat ? negative : timeout;
}

} // namespace

int main( int argc, char** argv )
{
  CLI::App app{"Exact synthesis of combinational circuits"};
  app.require_subcommand( 1 );
  app.fallthrough();
  app.set_config( "--config", "", "key=value defaults" );

  common_options o;
  app.add_option( "--seed", o.seed, "solver seed" );
  app.add_option( "--budget", o.budget, "seconds per solve (0: none)" );
  app.add_option( "--conflicts", o.conflicts, "conflicts per solve (0: none)" );
  app.add_flag( "--deterministic,!--nondeterministic", o.deterministic, "omit timings from outputs" );
  app.add_option( "--jobs", o.jobs, "sizes solved in parallel" )->check( CLI::PositiveNumber );
  app.add_option( "--solver", o.solver, "external DIMACS solver command, or 'embedded'" );
  app.add_option( "--manifest", o.manifest, "manifest path" );

  std::string family, range, out_dir = ".";
  auto* gen = app.add_subcommand( "bench-gen", "write ALU family netlists" );
  gen->add_option( "family", family )->required();
  gen->add_option( "range", range, "n, lo..hi, or a comma list" )->required();
  gen->add_option( "-o,--out-dir", out_dir );

  std::string spec, basis_name = "standard";
  uint64_t limit = 1000;
  auto* lc = app.add_subcommand( "label-count", "count labelings of a requirement's topology" );
  lc->add_option( "requirement", spec )->required();
  lc->add_option( "-b,--basis", basis_name );
  lc->add_option( "--limit", limit );

  synth_args sa;
  auto add_encoding_options = [&]( CLI::App* sub ) {
    sub->add_option( "requirement", spec )->required();
    sub->add_option( "-b,--basis", sa.basis );
    sub->add_option( "-m,--mode", sa.mode, "circuit, boolean-function, or network" );
    sub->add_flag( "--symmetry,!--no-symmetry", sa.symmetry );
    sub->add_flag( "--strict-symmetry", sa.strict );
    sub->add_option( "--ancilla-values", sa.ancilla_values, "comma list of 0, 1, free" );
  };
  auto* syn = app.add_subcommand( "synthesize", "find minimum circuits" );
  add_encoding_options( syn );
  syn->add_option( "--min-k", sa.min_k );
  syn->add_option( "--max-k", sa.max_k, "0: a bound from the requirement" );
  syn->add_option( "--enumerate", sa.enumerate, "list up to this many circuits per size" );
  syn->add_option( "--ancillae", sa.ancillae, "ancilla counts to sweep" );
  syn->add_flag( "--all-sizes", sa.all_sizes, "continue past the first size with a circuit" );
  syn->add_option( "-o,--out-dir", sa.out_dir );

  std::string other;
  auto* ver = app.add_subcommand( "verify", "check two circuits for equivalence" );
  ver->add_option( "a", spec )->required();
  ver->add_option( "b", other )->required();

  uint32_t k = 1;
  std::string format = "qdimacs", out_path;
  auto* exp = app.add_subcommand( "export", "write the synthesis formula for one size" );
  add_encoding_options( exp );
  exp->add_option( "-k", k )->required();
  exp->add_option( "--ancillae", sa.ancillae, "ancilla count" );
  exp->add_option( "-f,--format", format, "qdimacs or dimacs-expanded" );
  exp->add_option( "-o,--output", out_path );

  std::string cnf_path;
  auto* sat = app.add_subcommand( "sat", "solve a DIMACS file with the embedded solver" );
  sat->add_option( "file", cnf_path )->required();

  try
  {
    app.parse( argc, argv );
  }
  catch ( CLI::CallForHelp const& e )
  {
    return app.exit( e );
  }
  catch ( CLI::ParseError const& e )
  {
    app.exit( e );
    return usage;
  }

  try
  {
    if ( *gen )
      return cmd_bench_gen( o, family, range, out_dir );
    if ( *lc )
      return cmd_label_count( o, spec, basis_name, limit );
    if ( *syn )
      return cmd_synthesize( o, spec, sa );
    if ( *ver )
      return cmd_verify( o, spec, other );
    if ( *exp )
      return cmd_export( o, spec, sa, k, format, out_path );
    if ( *sat )
      return cmd_sat( o, cnf_path );
  }
  catch ( usage_error const& e )
  {
    std::cerr << "error: " << e.what() << "\n";
    return usage;
  }
  catch ( bench_error const& e )
  {
    std::cerr << "error: " << e.what() << "\n";
    return usage;
  }
  catch ( std::invalid_argument const& e )
  {
    std::cerr << "error: " << e.what() << "\n";
    return usage;
  }
  catch ( std::exception const& e )
  {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return usage;
}
