import java.io.BufferedReader;
import java.io.FileReader;

public class Reader {
    String firstLine(String path) {
        BufferedReader br = new BufferedReader(new FileReader(path));
        return br.readLine();
    }
}
