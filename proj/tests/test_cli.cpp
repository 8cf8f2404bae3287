#include <catch_amalgamated.hpp>

#include <exsyn/bench_io.hpp>
#include <exsyn/benchgen.hpp>
#include <exsyn/formula.hpp>
#include <exsyn/synthesis.hpp>

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sys/wait.h>

namespace fs = std::filesystem;
using namespace exsyn;

namespace
{

struct run_result
{
  int code;
  std::string out;
};

fs::path scratch( std::string const& name )
{
  auto p = fs::temp_directory_path() / ( "exsyn_cli_" + std::to_string( ::getpid() ) ) / name;
  fs::remove_all( p );
  fs::create_directories( p );
  return p;
}

run_result run( std::string const& args )
{
  auto const out = scratch( "io" ) / "stdout.txt";
  auto const cmd = std::string( "'" ) + EXSYN_CLI + "' " + args + " > '" + out.string() + "' 2>&1";
  int const st = std::system( cmd.c_str() );
  std::ifstream in( out );
  std::ostringstream os;
  os << in.rdbuf();
  return {WIFEXITED( st ) ? WEXITSTATUS( st ) : -1, os.str()};
}

std::string slurp( fs::path const& p )
{
  std::ifstream in( p, std::ios::binary );
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string q( fs::path const& p ) { return "'" + p.string() + "'"; }

} // namespace

TEST_CASE( "bench-gen writes the family tree" )
{
  auto const d = scratch( "gen" );
  auto r = run( "bench-gen add 1..4 -o " + q( d ) );
  REQUIRE( r.code == 0 );
  for ( uint32_t n = 1; n <= 4; ++n )
  {
    auto const c = read_bench_file( ( d / "add" / ( std::to_string( n ) + ".bench" ) ).string() );
    CHECK( c.num_gates() == 5 * n );
    CHECK( verify( c, gen_alu( {"add", n} ) ).equivalent );
  }
  auto const m = nlohmann::json::parse( slurp( d / "add.manifest.json" ) );
  CHECK( m["artifacts"].size() == 4 );

  auto r2 = run( "bench-gen moa 3 -o " + q( d ) );
  REQUIRE( r2.code == 0 );
  CHECK( read_bench_file( ( d / "moa" / "3.bench" ).string() ).num_gates() == 5 );

  CHECK( run( "bench-gen mux 3 -o " + q( d ) ).code == 2 );
  CHECK_FALSE( fs::exists( d / "mux" / "3.bench" ) );
  CHECK( run( "bench-gen nosuch 1 -o " + q( d ) ).code == 2 );
}

TEST_CASE( "label-count" )
{
  auto r = run( "label-count add:1" );
  REQUIRE( r.code == 0 );
  CHECK( r.out.find( "complete=1" ) != std::string::npos );
  auto const pos = r.out.find( "count=" );
  REQUIRE( pos != std::string::npos );
  CHECK( std::stoul( r.out.substr( pos + 6 ) ) >= 2 );

  auto const d = scratch( "lc" );
  circuit a;
  auto x = a.add_input( "x" );
  auto y = a.add_input( "y" );
  a.add_output( "z", {a.add_gate( gates::and_(), {{x, 0}, {y, 0}} ), 0} );
  std::ofstream( d / "and.bench" ) << serialize_bench( a );
  auto r1 = run( "label-count " + q( d / "and.bench" ) );
  REQUIRE( r1.code == 0 );
  CHECK( r1.out.find( "count=1\n" ) != std::string::npos );

  auto rt = run( "--conflicts 1 label-count add:1 --limit 1000" );
  CHECK( rt.code == 3 );
  CHECK( rt.out.find( "partial=1" ) != std::string::npos );

  basis only_and;
  only_and.name = "and";
  only_and.functions = {gates::and_()};
  std::ofstream( d / "and.basis" ) << serialize_basis( only_and );
  CHECK( run( "label-count add:1 -b " + q( d / "and.basis" ) ).code == 1 );
}

TEST_CASE( "synthesize writes verified circuits and bounds" )
{
  auto const d = scratch( "syn" );
  auto r = run( "synthesize sub:1 -o " + q( d ) );
  REQUIRE( r.code == 0 );
  auto const c = read_bench_file( ( d / "solution_0.bench" ).string() );
  CHECK( c.num_gates() == 5 );
  CHECK( verify( c, gen_alu( {"sub", 1} ) ).equivalent );

  /* contiguous unsat below the optimum */
  std::ifstream csv( d / "bounds.csv" );
  std::string line;
  std::getline( csv, line );
  CHECK( line == "family,n,k,status,gates,wall_time,conflicts" );
  std::vector<std::string> status;
  while ( std::getline( csv, line ) )
  {
    std::istringstream ls( line );
    std::string f, n, k, s;
    std::getline( ls, f, ',' );
    std::getline( ls, n, ',' );
    std::getline( ls, k, ',' );
    std::getline( ls, s, ',' );
    CHECK( std::stoul( k ) == status.size() );
    status.push_back( s );
  }
  REQUIRE( status.size() == 6 );
  for ( auto i = 0u; i < 5u; ++i )
    CHECK( status[i] == "unsat" );
  CHECK( status[5] == "sat" );

  auto const m = nlohmann::json::parse( slurp( d / "manifest.json" ) );
  for ( auto const& a : m["artifacts"] )
  {
    CHECK( a["verified"] == true );
    CHECK( verify( read_bench_file( ( d / a["path"].get<std::string>() ).string() ), gen_alu( {"sub", 1} ) ).equivalent );
  }

  CHECK( run( "synthesize add:1 --max-k 4 -o " + q( d / "neg" ) ).code == 1 );
  CHECK( run( "--conflicts 1 synthesize add:1 --min-k 4 --max-k 4 -o " + q( d / "to" ) ).code == 3 );
  CHECK( run( "synthesize add:1 -m mesh -o " + q( d / "bad" ) ).code == 2 );
  CHECK( run( "synthesize add:1 --ancilla-values 2 -o " + q( d / "bad" ) ).code == 2 );
}

TEST_CASE( "deterministic manifests are byte-identical" )
{
  auto const a = scratch( "det_a" );
  auto const b = scratch( "det_b" );
  REQUIRE( run( "--jobs 2 synthesize add:1 --enumerate 3 -o " + q( a ) ).code == 0 );
  REQUIRE( run( "--jobs 2 synthesize add:1 --enumerate 3 -o " + q( b ) ).code == 0 );
  CHECK( slurp( a / "manifest.json" ) == slurp( b / "manifest.json" ) );
  CHECK( slurp( a / "bounds.csv" ) == slurp( b / "bounds.csv" ) );
  CHECK( slurp( a / "solution_2.bench" ) == slurp( b / "solution_2.bench" ) );
}

TEST_CASE( "config file supplies defaults" )
{
  auto const d = scratch( "cfg" );
  std::ofstream( d / "run.cfg" ) << "conflicts=1\n";
  auto r = run( "--config " + q( d / "run.cfg" ) + " label-count add:1" );
  CHECK( r.code == 3 );
}

TEST_CASE( "verify exit codes and counterexamples" )
{
  CHECK( run( "verify moa:3 add:1" ).code == 0 );

  auto const d = scratch( "ver" );
  auto fa = gen_alu( {"add", 1} );
  auto bad = fa;
  for ( auto i = 0u; i < bad.num_nodes(); ++i )
    if ( bad.is_gate( i ) && bad.node( i ).fn->name() == "OR" )
    {
      bad.set_function( i, gates::and_() );
      break;
    }
  std::ofstream( d / "bad.bench" ) << serialize_bench( bad );
  auto r = run( "verify " + q( d / "bad.bench" ) + " add:1" );
  CHECK( r.code == 1 );
  auto const pos = r.out.find( "counterexample=" );
  REQUIRE( pos != std::string::npos );
  /* the printed vector really separates the two circuits */
  std::map<std::string, bool> in;
  std::istringstream ls( r.out.substr( pos + 15, r.out.find( '\n', pos ) - pos - 15 ) );
  std::string tok;
  while ( ls >> tok )
    in[tok.substr( 0, tok.find( '=' ) )] = tok.back() == '1';
  CHECK( in.size() == 3 );
  CHECK( evaluate( bad, in ) != evaluate( fa, in ) );

  CHECK( run( "verify add:1 add:2" ).code == 2 );
  CHECK( run( "verify add:1 " + q( d / "missing.bench" ) ).code == 2 );
  CHECK( run( "verify add:1" ).code == 2 );
  CHECK( run( "frobnicate" ).code == 2 );
}

TEST_CASE( "export formats" )
{
  auto const d = scratch( "exp" );
  REQUIRE( run( "export add:1 -k 5 -f qdimacs -o " + q( d / "f.qdimacs" ) ).code == 0 );
  auto const qd = parse_qdimacs( slurp( d / "f.qdimacs" ) );
  REQUIRE( qd.blocks.size() >= 2 );
  CHECK( qd.blocks[0].first == quantifier::exists );
  CHECK( qd.blocks[1].first == quantifier::forall );
  CHECK( qd.blocks[1].second.size() == 3 );

  REQUIRE( run( "export add:1 -k 5 -f dimacs-expanded -o " + q( d / "f.cnf" ) ).code == 0 );
  auto const text = slurp( d / "f.cnf" );
  CHECK( text.rfind( "c copies 8\n", 0 ) == 0 );
  auto const cnf = parse_qdimacs( text ).formula;
  CHECK( cnf.num_vars > 0 );

  CHECK( run( "export add:1 -k 5 -f blif" ).code == 2 );
}

TEST_CASE( "sat subcommand" )
{
  auto const d = scratch( "sat" );
  std::ofstream( d / "s.cnf" ) << "p cnf 2 2\n1 2 0\n-1 0\n";
  auto r = run( "sat " + q( d / "s.cnf" ) );
  CHECK( r.code == 0 );
  CHECK( r.out == "s SATISFIABLE\nv -1 2 0\n" );
  std::ofstream( d / "u.cnf" ) << "p cnf 1 2\n1 0\n-1 0\n";
  auto u = run( "sat " + q( d / "u.cnf" ) );
  CHECK( u.code == 1 );
  CHECK( u.out == "s UNSATISFIABLE\n" );
}

TEST_CASE( "synthesis through an external solver command" )
{
  auto const d = scratch( "ext" );
  auto const cmd = std::string( EXSYN_CLI ) + " sat";
  auto r = run( "--solver '" + cmd + "' synthesize add:1 -o " + q( d ) );
  REQUIRE( r.code == 0 );
  CHECK( r.out.find( "upper=5" ) != std::string::npos );
  CHECK( r.out.find( "lower=5" ) != std::string::npos );
}
