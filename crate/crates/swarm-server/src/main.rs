use tokio::net::TcpListener;

#[tokio::main]
async fn main() -> std::io::Result<()> {
    tracing_subscriber::fmt().init();
    let addr = std::env::args().nth(1).unwrap_or_else(|| "127.0.0.1:8750".to_string());
    let listener = TcpListener::bind(&addr).await?;
    tracing::info!("swarm simulation service listening on {}", listener.local_addr()?);
    swarm_server::serve(listener).await
}
